#pragma once

// Data-parallel inner loops used by the Gram assembly, the residual checks
// and the variational right-hand sides. Every kernel has a scalar reference
// implementation; wider variants are selected once at runtime from the CPU
// feature bits and must agree with the reference to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace csync::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Column-major view with an explicit leading dimension.
struct ConstMatrixRef {
    const double* data;
    std::size_t rows;
    std::size_t cols;
    std::size_t ld;

    double operator()(std::size_t r, std::size_t c) const { return data[c * ld + r]; }
};

struct MatrixRef {
    double* data;
    std::size_t rows;
    std::size_t cols;
    std::size_t ld;

    double& operator()(std::size_t r, std::size_t c) const { return data[c * ld + r]; }
};

struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    double (*sum_squares)(const double* x, std::size_t n);
    double (*max_abs)(const double* x, std::size_t n);
};

const KernelTable& scalar_table();
#if defined(CSYNC_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

bool isa_supported(Isa isa);
Isa detect_isa();

/// The table in use. Defaults to detect_isa().
const KernelTable& active();
Isa active_isa();

/// Overrides the runtime choice; returns false (and changes nothing) when the
/// CPU or the build lacks the requested variant.
bool set_isa(Isa isa);

// Convenience wrappers over active().

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double sum_squares(std::span<const double> x);
double max_abs(std::span<const double> x);

/// out += alpha * (a ⊗ b). `out` must be (a.rows*b.rows) x (a.cols*b.cols).
void kron_accumulate(double alpha, ConstMatrixRef a, ConstMatrixRef b, MatrixRef out,
                     const KernelTable& table = active());

}  // namespace csync::kernels
