#include "hlamkit/kernels.hpp"

#include <atomic>
#include <cassert>

#include "hlamkit/errors.hpp"

namespace hlamkit {

namespace {

void check_rows(const CsrMatrix& a, Range rows) {
  if (rows.begin < 0 || rows.end > a.nrows || rows.begin > rows.end)
    throw ContractViolation("row range out of bounds");
}

inline double load_relaxed(double& x) {
  return std::atomic_ref<double>(x).load(std::memory_order_relaxed);
}

inline void store_relaxed(double& x, double v) {
  std::atomic_ref<double>(x).store(v, std::memory_order_relaxed);
}

template <bool Relaxed>
void gs_half_sweep(const CsrMatrix& a, std::span<double> x,
                   std::span<const double> b, Range rows, bool forward,
                   AccessCounter* counter) {
  check_rows(a, rows);
  const std::int64_t step = forward ? 1 : -1;
  const std::int64_t first = forward ? rows.begin : rows.end - 1;
  const std::int64_t last = forward ? rows.end : rows.begin - 1;
  for (std::int64_t i = first; i != last; i += step) {
    double sum = b[i];
    const double diag = a.values[a.diag_pos[i]];
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const std::int64_t col = a.col_idx[k];
      if (col == i) continue;
      const double xj = Relaxed ? load_relaxed(x[col]) : x[col];
      sum -= a.values[k] * xj;
    }
    const double xi = sum / diag;
    if constexpr (Relaxed)
      store_relaxed(x[i], xi);
    else
      x[i] = xi;
  }
  if (counter) {
    const std::uint64_t n = static_cast<std::uint64_t>(rows.size());
    const std::uint64_t nnz = static_cast<std::uint64_t>(
        a.row_ptr[rows.end] - a.row_ptr[rows.begin]);
    counter->add_reads(nnz + 2 * n);  // values, x footprint, b
    counter->add_writes(n);
  }
}

}  // namespace

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y,
          Range rows, AccessCounter* counter) {
  check_rows(a, rows);
  for (std::int64_t i = rows.begin; i < rows.end; ++i) {
    double sum = 0.0;
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      sum += a.values[k] * x[a.col_idx[k]];
    y[i] = sum;
  }
  if (counter) {
    const std::uint64_t n = static_cast<std::uint64_t>(rows.size());
    const std::uint64_t nnz = static_cast<std::uint64_t>(
        a.row_ptr[rows.end] - a.row_ptr[rows.begin]);
    counter->add_reads(nnz + n);
    counter->add_writes(n);
  }
}

double dot_block(std::span<const double> x, std::span<const double> y,
                 Range range, AccessCounter* counter) {
  double sum = 0.0;
  for (std::int64_t i = range.begin; i < range.end; ++i) sum += x[i] * y[i];
  if (counter) {
    const std::uint64_t n = static_cast<std::uint64_t>(range.size());
    counter->add_reads(x.data() == y.data() ? n : 2 * n);
  }
  return sum;
}

void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> w, Range range,
           AccessCounter* counter) {
  for (std::int64_t i = range.begin; i < range.end; ++i)
    w[i] = a * x[i] + b * y[i];
  if (counter) {
    const std::uint64_t n = static_cast<std::uint64_t>(range.size());
    counter->add_reads(2 * n);
    counter->add_writes(n);
  }
}

void triad(double a, std::span<const double> x, double b,
           std::span<const double> y, double c, std::span<double> z,
           Range range, AccessCounter* counter) {
  for (std::int64_t i = range.begin; i < range.end; ++i)
    z[i] = a * x[i] + b * y[i] + c * z[i];
  if (counter) {
    const std::uint64_t n = static_cast<std::uint64_t>(range.size());
    counter->add_reads(3 * n);
    counter->add_writes(n);
  }
}

double residual_fused(const CsrMatrix& a, std::span<const double> x,
                      std::span<const double> b, std::span<double> r,
                      Range rows, AccessCounter* counter) {
  check_rows(a, rows);
  double sumsq = 0.0;
  for (std::int64_t i = rows.begin; i < rows.end; ++i) {
    double sum = 0.0;
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      sum += a.values[k] * x[a.col_idx[k]];
    const double ri = b[i] - sum;
    r[i] = ri;
    sumsq += ri * ri;
  }
  if (counter) {
    const std::uint64_t n = static_cast<std::uint64_t>(rows.size());
    const std::uint64_t nnz = static_cast<std::uint64_t>(
        a.row_ptr[rows.end] - a.row_ptr[rows.begin]);
    counter->add_reads(nnz + 2 * n);  // values, x footprint, b
    counter->add_writes(n);
  }
  return sumsq;
}

double jacobi_sweep(const CsrMatrix& a, std::span<const double> x_old,
                    std::span<const double> b, std::span<double> x_new,
                    Range rows, AccessCounter* counter) {
  check_rows(a, rows);
  double sumsq = 0.0;
  for (std::int64_t i = rows.begin; i < rows.end; ++i) {
    double off = 0.0;
    const double diag = a.values[a.diag_pos[i]];
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const std::int64_t col = a.col_idx[k];
      if (col != i) off += a.values[k] * x_old[col];
    }
    x_new[i] = (b[i] - off) / diag;
    const double ri = b[i] - off - diag * x_old[i];
    sumsq += ri * ri;
  }
  if (counter) {
    const std::uint64_t n = static_cast<std::uint64_t>(rows.size());
    const std::uint64_t nnz = static_cast<std::uint64_t>(
        a.row_ptr[rows.end] - a.row_ptr[rows.begin]);
    counter->add_reads(nnz + 2 * n);
    counter->add_writes(n);
  }
  return sumsq;
}

void gs_forward(const CsrMatrix& a, std::span<double> x,
                std::span<const double> b, Range rows,
                AccessCounter* counter) {
  gs_half_sweep<false>(a, x, b, rows, true, counter);
}

void gs_backward(const CsrMatrix& a, std::span<double> x,
                 std::span<const double> b, Range rows,
                 AccessCounter* counter) {
  gs_half_sweep<false>(a, x, b, rows, false, counter);
}

void gs_forward_relaxed(const CsrMatrix& a, std::span<double> x,
                        std::span<const double> b, Range rows,
                        AccessCounter* counter) {
  gs_half_sweep<true>(a, x, b, rows, true, counter);
}

void gs_backward_relaxed(const CsrMatrix& a, std::span<double> x,
                         std::span<const double> b, Range rows,
                         AccessCounter* counter) {
  gs_half_sweep<true>(a, x, b, rows, false, counter);
}

double estimate_accesses(KrylovMethod method, double avg_nnz_per_row,
                         std::int64_t rows) {
  const double n = avg_nnz_per_row;
  const double r = static_cast<double>(rows);
  switch (method) {
    case KrylovMethod::Cg:
      return (12.0 + n) * r;
    case KrylovMethod::CgNb:
      return (15.0 + n) * r;
    case KrylovMethod::BiCgStab:
      return (21.0 + 2.0 * n) * r;
    case KrylovMethod::BiCgStabB1:
      return (24.0 + 2.0 * n) * r;
  }
  return 0.0;
}

}  // namespace hlamkit
