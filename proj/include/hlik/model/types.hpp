#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "hlik/errors.hpp"

namespace hlik {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace model {

// Working scale bookkeeping: which parameterization the coordinates are in.
enum class ParamScale { natural, log };
enum class VScale { natural, log, custom };

struct ParameterVector {
    Vec values;
    std::vector<ParamScale> scale_labels;

    ParameterVector() = default;
    explicit ParameterVector(Vec v, ParamScale s = ParamScale::natural)
        : values(std::move(v)), scale_labels(values.size(), s) {}
    int dim() const { return static_cast<int>(values.size()); }
};

struct UnobservableVector {
    Vec values;
    VScale scale_label = VScale::natural;

    UnobservableVector() = default;
    explicit UnobservableVector(Vec v, VScale s = VScale::natural)
        : values(std::move(v)), scale_label(s) {}
    int dim() const { return static_cast<int>(values.size()); }
};

// Observations plus the summaries every formula in the built-in models
// depends on.
class ObservedData {
  public:
    explicit ObservedData(std::vector<double> obs) : y_(std::move(obs)) {
        if (y_.empty()) throw InvalidConfig("ObservedData: need at least one observation");
        double s = 0.0;
        for (double v : y_) {
            if (!std::isfinite(v)) throw InvalidConfig("ObservedData: non-finite observation");
            s += v;
        }
        sum_ = s;
        mean_ = s / static_cast<double>(y_.size());
        double ss = 0.0;
        for (double v : y_) ss += (v - mean_) * (v - mean_);
        centered_ss_ = ss;
    }

    const std::vector<double>& observations() const { return y_; }
    int n() const { return static_cast<int>(y_.size()); }
    double mean() const { return mean_; }          // ybar_n
    double total() const { return sum_; }          // U_n = n * ybar_n
    double centered_ss() const { return centered_ss_; }

  private:
    std::vector<double> y_;
    double sum_ = 0.0;
    double mean_ = 0.0;
    double centered_ss_ = 0.0;
};

}  // namespace model
}  // namespace hlik
