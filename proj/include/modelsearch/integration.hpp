#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "modelsearch/lake.hpp"

namespace modelsearch {

/// m(i, j) = distinct shared tokens between axis i of the integrated table and
/// axis j of the incoming table. Axis 0 is the header row without the corner
/// (key-column) header; axis 1 is the non-numeric first-column values.
using OverlapMatrix = Eigen::Matrix<std::int64_t, 2, 2>;

/// Comparison view assembled from several tables. Every non-null cell records
/// the id of the table it came from; null-filled cells have an empty source.
struct IntegratedTable {
    std::vector<std::string> headers;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::vector<std::string>> provenance;
    std::vector<std::string> sources;     ///< table ids in integration order
    std::vector<std::string> transposed;  ///< ids of tables that were flipped first

    static IntegratedTable from_table(const EvidenceTable& t);

    std::size_t column_count() const noexcept { return headers.size(); }
    std::size_t row_count() const noexcept { return rows.size(); }
    std::size_t null_count() const;
};

OverlapMatrix overlap_matrix(const IntegratedTable& integrated, const EvidenceTable& t);
OverlapMatrix overlap_matrix(const EvidenceTable& a, const EvidenceTable& b);

/// Transposed iff the header row of the integrated side meets only the first
/// column of the incoming table.
inline bool detect_transpose(const OverlapMatrix& m)
{
    return m(0, 1) > 0 && m(0, 0) == 0 && m(1, 1) == 0;
}

/// Pivots a table: the corner header stays, first-column values become the
/// remaining headers, and the other headers become the new first column.
/// Throws InvalidArgument for tables with fewer than two columns.
EvidenceTable transpose(const EvidenceTable& t);

/// Aligns T's columns onto I (equal headers first, then value Jaccard, greedy
/// one-to-one), appends unaligned columns, appends T's rows with null fill,
/// then folds each new row into an earlier row with the same key when no
/// non-null cell disagrees. Conflicting rows are kept separately.
IntegratedTable integrate_pair(const IntegratedTable& integrated, const EvidenceTable& t, double tau = 0.2);

/// Orientation-aware loop: for each table in order, flip it when the overlap
/// pattern says it is transposed, then integrate it.
IntegratedTable integrate_all(const EvidenceTable& query_table, std::span<const EvidenceTable> retrieved,
                              double tau = 0.2);

std::string to_csv(const IntegratedTable& t);
std::string to_markdown(const IntegratedTable& t);
json to_json(const IntegratedTable& t);

}  // namespace modelsearch
