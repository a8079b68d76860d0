#include <atomic>
#include <cassert>

#include "csync/kernels.hpp"

namespace csync::kernels {
namespace {

const KernelTable* table_for(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return &scalar_table();
        case Isa::avx2:
#if defined(CSYNC_HAVE_AVX2)
            return &avx2_table();
#else
            return nullptr;
#endif
    }
    return nullptr;
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{table_for(detect_isa())};
    return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(CSYNC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

Isa detect_isa() { return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

Isa active_isa() { return active().isa; }

bool set_isa(Isa isa) {
    if (!isa_supported(isa)) return false;
    current().store(table_for(isa), std::memory_order_relaxed);
    return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    active().axpy(alpha, x.data(), y.data(), x.size());
}

double sum_squares(std::span<const double> x) { return active().sum_squares(x.data(), x.size()); }

double max_abs(std::span<const double> x) { return active().max_abs(x.data(), x.size()); }

void kron_accumulate(double alpha, ConstMatrixRef a, ConstMatrixRef b, MatrixRef out,
                     const KernelTable& table) {
    assert(out.rows == a.rows * b.rows && out.cols == a.cols * b.cols);
    // Column (j*b.cols + l) of out, rows [i*b.rows, (i+1)*b.rows), receives
    // alpha * a(i, j) * b(:, l): one contiguous axpy per (i, j, l).
    for (std::size_t j = 0; j < a.cols; ++j) {
        for (std::size_t i = 0; i < a.rows; ++i) {
            const double aij = alpha * a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t l = 0; l < b.cols; ++l) {
                double* dst = &out(i * b.rows, j * b.cols + l);
                table.axpy(aij, b.data + l * b.ld, dst, b.rows);
            }
        }
    }
}

}  // namespace csync::kernels
