#pragma once

#include "mvr/manifold.hpp"

namespace mvr {

/// Cartesian product with the sum metric. Coordinates are the factor
/// coordinates concatenated in order.
class Product final : public Manifold {
 public:
  explicit Product(std::vector<ManifoldPtr> factors) {
    // Flatten nested products.
    for (auto& f : factors) {
      if (!f) throw ArgumentError("null product factor");
      if (auto* inner = dynamic_cast<const Product*>(f.get())) {
        for (auto& g : inner->factors_) factors_.push_back(g);
      } else {
        factors_.push_back(f);
      }
    }
    if (factors_.size() < 2) throw ArgumentError("product needs at least two factors");
    desc_.kind = ManifoldKind::product;
    int offset = 0;
    for (auto& f : factors_) {
      offsets_.push_back(offset);
      offset += f->ambient_dim();
      desc_.intrinsic_dim += f->intrinsic_dim();
      desc_.factors.push_back(f->descriptor());
    }
    offsets_.push_back(offset);
    desc_.ambient_dim = offset;
  }

  const ManifoldDescriptor& descriptor() const override { return desc_; }
  const std::vector<ManifoldPtr>& factors() const { return factors_; }

  Eigen::VectorXd part(const Eigen::VectorXd& x, std::size_t k) const {
    return x.segment(offsets_[k], offsets_[k + 1] - offsets_[k]);
  }

  Point exp(const Point& p, const Tangent& v) const override {
    return join([&](std::size_t k) { return factors_[k]->exp(part(p, k), part(v, k)); });
  }

  LogResult log_checked(const Point& p, const Point& q) const override {
    LogResult r{Tangent(desc_.ambient_dim), false};
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      LogResult l = factors_[k]->log_checked(part(p, k), part(q, k));
      r.v.segment(offsets_[k], l.v.size()) = l.v;
      r.non_unique = r.non_unique || l.non_unique;
    }
    return r;
  }

  double inner(const Point& p, const Tangent& v, const Tangent& w) const override {
    double s = 0;
    for (std::size_t k = 0; k < factors_.size(); ++k)
      s += factors_[k]->inner(part(p, k), part(v, k), part(w, k));
    return s;
  }

  double dist(const Point& p, const Point& q) const override {
    double s = 0;
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      const double d = factors_[k]->dist(part(p, k), part(q, k));
      s += d * d;
    }
    return std::sqrt(s);
  }

  Point geopoint(const Point& p, const Point& q, double t) const override {
    return join([&](std::size_t k) { return factors_[k]->geopoint(part(p, k), part(q, k), t); });
  }

  Tangent transport(const Point& p, const Point& q, const Tangent& v) const override {
    return join([&](std::size_t k) {
      return factors_[k]->transport(part(p, k), part(q, k), part(v, k));
    });
  }

  Point project(const Point& x) const override {
    return join([&](std::size_t k) { return factors_[k]->project(part(x, k)); });
  }

  Tangent project_tangent(const Point& p, const Tangent& v) const override {
    return join([&](std::size_t k) { return factors_[k]->project_tangent(part(p, k), part(v, k)); });
  }

  double constraint_violation(const Point& x) const override {
    double s = 0;
    for (std::size_t k = 0; k < factors_.size(); ++k)
      s = std::max(s, factors_[k]->constraint_violation(part(x, k)));
    return s;
  }

  std::vector<Tangent> tangent_basis(const Point& p) const override {
    std::vector<Tangent> basis;
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      for (const Tangent& e : factors_[k]->tangent_basis(part(p, k))) {
        Tangent full = Tangent::Zero(desc_.ambient_dim);
        full.segment(offsets_[k], e.size()) = e;
        basis.push_back(full);
      }
    }
    return basis;
  }

  Point base_point() const override {
    return join([&](std::size_t k) { return factors_[k]->base_point(); });
  }

  Tangent diff_geopoint_second(const Point& p, const Point& q, double t,
                               const Tangent& eta) const override {
    return join([&](std::size_t k) {
      return factors_[k]->diff_geopoint_second(part(p, k), part(q, k), t, part(eta, k));
    });
  }
  Tangent diff_log_second(const Point& p, const Point& q, const Tangent& eta) const override {
    return join([&](std::size_t k) {
      return factors_[k]->diff_log_second(part(p, k), part(q, k), part(eta, k));
    });
  }
  Tangent diff_log_first(const Point& p, const Point& q, const Tangent& xi) const override {
    return join([&](std::size_t k) {
      return factors_[k]->diff_log_first(part(p, k), part(q, k), part(xi, k));
    });
  }
  Tangent diff_exp(const Point& p, const Tangent& v, const Tangent& w) const override {
    return join([&](std::size_t k) {
      return factors_[k]->diff_exp(part(p, k), part(v, k), part(w, k));
    });
  }

 private:
  template <class F>
  Eigen::VectorXd join(F&& per_factor) const {
    Eigen::VectorXd out(desc_.ambient_dim);
    for (std::size_t k = 0; k < factors_.size(); ++k)
      out.segment(offsets_[k], offsets_[k + 1] - offsets_[k]) = per_factor(k);
    return out;
  }

  std::vector<ManifoldPtr> factors_;
  std::vector<int> offsets_;
  ManifoldDescriptor desc_;
};

}  // namespace mvr
