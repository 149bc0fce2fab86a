#include "surreal/types.hpp"

#include <mutex>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace surreal {

std::string shape_string(Eigen::Index rows, Eigen::Index cols)
{
    return std::to_string(rows) + "x" + std::to_string(cols);
}

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& what)
{
    if (m.rows() != rows || m.cols() != cols) {
        throw ShapeError(what + ": expected " + shape_string(rows, cols) + ", got " +
                         shape_string(m.rows(), m.cols()));
    }
}

void require_cols(const Matrix& m, Eigen::Index cols, const std::string& what)
{
    if (m.cols() != cols) {
        throw ShapeError(what + ": expected " + std::to_string(cols) + " columns, got " +
                         std::to_string(m.cols()));
    }
}

void tune_allocator()
{
#if defined(__GLIBC__)
    static std::once_flag once;
    std::call_once(once, [] {
        mallopt(M_MMAP_THRESHOLD, 256 * 1024 * 1024);
        mallopt(M_TRIM_THRESHOLD, 1024 * 1024 * 1024);
    });
#endif
}

}  // namespace surreal
