#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vgp {

/// CSV writer that serializes doubles with 17 significant digits so that
/// files round-trip bit-exactly and hash comparisons are meaningful.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void row(std::initializer_list<double> values);
    void row(const std::vector<std::string>& cells);
    static std::string format_double(double v);

private:
    std::ofstream out_;
    std::size_t columns_;
};

/// Little-endian column-store for dense double matrices.
/// Layout: magic "VGPB", u32 version, u64 rows, u64 cols, row-major doubles.
void write_binary_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_binary_matrix(const std::string& path);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& header);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace vgp
