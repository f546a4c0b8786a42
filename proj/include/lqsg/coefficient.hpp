#pragma once

#include <cmath>
#include <utility>

#include "lqsg/types.hpp"

namespace lqsg {

/// Deterministic matrix-valued coefficient t -> M(t) on [0, T].
/// Three concrete forms: constant, piecewise-constant table (left-continuous),
/// and the named analytic form exp(-beta t) * scale.
class CoefficientFn {
public:
    enum class Kind { Constant, Table, ExpDiscount };

    CoefficientFn() = default;

    static CoefficientFn constant(Matrix value) {
        CoefficientFn f;
        f.kind_ = Kind::Constant;
        f.value_ = std::move(value);
        return f;
    }

    /// Piecewise-constant, value_[k] on [times[k], times[k+1]); left-continuous
    /// convention, so a query at or past the last breakpoint returns the last value.
    static CoefficientFn table(std::vector<double> times, std::vector<Matrix> values) {
        if (times.empty() || times.size() != values.size())
            throw StructuralError("CoefficientFn::table: times/values size mismatch");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw StructuralError("CoefficientFn::table: breakpoints must increase");
        for (const Matrix& v : values)
            if (v.rows() != values.front().rows() || v.cols() != values.front().cols())
                throw StructuralError("CoefficientFn::table: inconsistent entry shapes");
        CoefficientFn f;
        f.kind_ = Kind::Table;
        f.times_ = std::move(times);
        f.table_ = std::move(values);
        return f;
    }

    static CoefficientFn exp_discount(double beta, Matrix scale) {
        CoefficientFn f;
        f.kind_ = Kind::ExpDiscount;
        f.beta_ = beta;
        f.value_ = std::move(scale);
        return f;
    }

    Kind kind() const { return kind_; }
    double beta() const { return beta_; }
    const std::vector<double>& breakpoints() const { return times_; }
    const std::vector<Matrix>& table_values() const { return table_; }
    const Matrix& base() const { return value_; }

    Eigen::Index rows() const { return kind_ == Kind::Table ? table_.front().rows() : value_.rows(); }
    Eigen::Index cols() const { return kind_ == Kind::Table ? table_.front().cols() : value_.cols(); }

    Matrix operator()(double t) const {
        switch (kind_) {
            case Kind::Constant:
                return value_;
            case Kind::ExpDiscount:
                return std::exp(-beta_ * t) * value_;
            case Kind::Table: {
                // last interval whose breakpoint is <= t; queries before the first
                // breakpoint clamp to the first entry
                std::size_t k = 0;
                while (k + 1 < times_.size() && times_[k + 1] <= t) ++k;
                return table_[k];
            }
        }
        return value_;
    }

private:
    Kind kind_ = Kind::Constant;
    Matrix value_ = Matrix::Zero(0, 0);
    double beta_ = 0.0;
    std::vector<double> times_;
    std::vector<Matrix> table_;
};

}  // namespace lqsg
