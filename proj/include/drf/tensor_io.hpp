#pragma once

#include <string>
#include <vector>

#include "drf/tensor.hpp"

namespace drf {

/// Writes `<path>.json` (shape, dtype, byte order, layout) and `<path>.bin`
/// (raw little-endian float32, row-major). load_tensor inverts bit-exactly.
void save_tensor(const Tensor& t, const std::string& path);

/// Reads a container written by save_tensor. Throws IoError on a missing or
/// inconsistent pair ("corrupt container") or a non-finite payload.
Tensor load_tensor(const std::string& path);

/// Exports a rank-2 [h,w] or rank-3 [h,w,3] tensor as a 16-bit PNG.
/// With normalize the value range is mapped affinely to [0, 65535]
/// (a constant image maps to 0); otherwise values are clamped to [0,1]
/// and scaled by 65535.
void export_image(const Tensor& t, const std::string& path, bool normalize);

/// Reads a 16-bit PNG written by export_image back into [h,w] or [h,w,3]
/// with values in [0,1].
Tensor load_image(const std::string& path);

/// One CSV row: a label plus a fixed number of values.
struct CsvRow {
    std::string label;
    std::vector<double> values;
};

/// RFC-4180 CSV ('.' decimal separator, CRLF line ends, values printed with
/// nine digits after the decimal point). All rows must match the header
/// arity; an empty row list yields a header-only file.
void export_csv(const std::string& path, const std::vector<std::string>& header,
                const std::vector<CsvRow>& rows);

} // namespace drf
