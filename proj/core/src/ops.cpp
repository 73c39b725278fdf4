#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "alignahead/autodiff.hpp"
#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

namespace {

using detail::Node;

// Accumulates `contribution(dst)` into parent i when that parent needs it.
template <typename F>
void into_parent(Node& self, std::size_t i, F&& contribution) {
  Node& p = *self.parents[i];
  if (!p.requires_grad) return;
  contribution(p.grad_buffer());
}

void require_same_shape(const char* op, const DiffValue& a, const DiffValue& b) {
  if (!a.value().same_shape(b.value())) {
    throw ShapeError(std::string(op) + ": shapes " + a.value().shape_string() + " and " +
                     b.value().shape_string() + " differ");
  }
}

void require_column(const char* op, const DiffValue& x) {
  if (x.cols() != 1) {
    throw ShapeError(std::string(op) + ": expected a column, got " + x.value().shape_string());
  }
}

Real log_eps(Real v) { return std::log(v + kLogEpsilon); }

}  // namespace

// --- linear algebra ---------------------------------------------------------

DiffValue matmul(const DiffValue& a, const DiffValue& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ (" + a.value().shape_string() + " * " +
                     b.value().shape_string() + ")");
  }
  return DiffValue::make(multiply(a.value(), b.value()), {a, b}, [](Node& self) {
    const DenseMatrix& g = self.grad;
    const DenseMatrix& av = self.parents[0]->value;
    const DenseMatrix& bv = self.parents[1]->value;
    into_parent(self, 0, [&](DenseMatrix& dst) { gemm_accumulate(g, false, bv, true, dst); });
    into_parent(self, 1, [&](DenseMatrix& dst) { gemm_accumulate(av, true, g, false, dst); });
  });
}

DiffValue spmm(const CsrMatrix& s, const DiffValue& d) {
  DenseMatrix out = s.multiply(d.value());
  return DiffValue::make(std::move(out), {d}, [s](Node& self) {
    into_parent(self, 0,
                [&](DenseMatrix& dst) { s.transpose_multiply_accumulate(self.grad, dst); });
  });
}

DiffValue add(const DiffValue& a, const DiffValue& b) {
  require_same_shape("add", a, b);
  DenseMatrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return DiffValue::make(std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      into_parent(self, k, [&](DenseMatrix& dst) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += self.grad[i];
      });
    }
  });
}

DiffValue sub(const DiffValue& a, const DiffValue& b) {
  require_same_shape("sub", a, b);
  DenseMatrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return DiffValue::make(std::move(out), {a, b}, [](Node& self) {
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += self.grad[i];
    });
    into_parent(self, 1, [&](DenseMatrix& dst) {
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= self.grad[i];
    });
  });
}

DiffValue hadamard(const DiffValue& a, const DiffValue& b) {
  require_same_shape("hadamard", a, b);
  DenseMatrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return DiffValue::make(std::move(out), {a, b}, [](Node& self) {
    const DenseMatrix& av = self.parents[0]->value;
    const DenseMatrix& bv = self.parents[1]->value;
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += self.grad[i] * bv[i];
    });
    into_parent(self, 1, [&](DenseMatrix& dst) {
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += self.grad[i] * av[i];
    });
  });
}

DiffValue scale(const DiffValue& x, Real factor) {
  DenseMatrix out = x.value();
  for (auto& v : out.values()) v *= factor;
  return DiffValue::make(std::move(out), {x}, [factor](Node& self) {
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += factor * self.grad[i];
    });
  });
}

DiffValue add_scalar(const DiffValue& x, Real offset) {
  DenseMatrix out = x.value();
  for (auto& v : out.values()) v += offset;
  return DiffValue::make(std::move(out), {x}, [](Node& self) {
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += self.grad[i];
    });
  });
}

DiffValue add_row_vector(const DiffValue& x, const DiffValue& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) {
    throw ShapeError("add_row_vector: bias " + bias.value().shape_string() + " for input " +
                     x.value().shape_string());
  }
  DenseMatrix out = x.value();
  const std::size_t n = out.cols();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < n; ++c) out(r, c) += bias.value()[c];
  return DiffValue::make(std::move(out), {x, bias}, [](Node& self) {
    const DenseMatrix& g = self.grad;
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
    });
    into_parent(self, 1, [&](DenseMatrix& dst) {
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) dst[c] += g(r, c);
    });
  });
}

DiffValue scale_rows(const DiffValue& x, const DiffValue& w) {
  require_column("scale_rows", w);
  if (w.rows() != x.rows()) {
    throw ShapeError("scale_rows: weights " + w.value().shape_string() + " for input " +
                     x.value().shape_string());
  }
  DenseMatrix out = x.value();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (auto& v : out.row(r)) v *= w.value()[r];
  return DiffValue::make(std::move(out), {x, w}, [](Node& self) {
    const DenseMatrix& g = self.grad;
    const DenseMatrix& xv = self.parents[0]->value;
    const DenseMatrix& wv = self.parents[1]->value;
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) dst(r, c) += g(r, c) * wv[r];
    });
    into_parent(self, 1, [&](DenseMatrix& dst) {
      for (std::size_t r = 0; r < g.rows(); ++r) {
        Real acc = 0;
        for (std::size_t c = 0; c < g.cols(); ++c) acc += g(r, c) * xv(r, c);
        dst[r] += acc;
      }
    });
  });
}

DiffValue add_n(std::span<const DiffValue> xs) {
  if (xs.empty()) throw ShapeError("add_n: no operands");
  DenseMatrix out = xs[0].value();
  for (std::size_t k = 1; k < xs.size(); ++k) {
    require_same_shape("add_n", xs[0], xs[k]);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += xs[k].value()[i];
  }
  return DiffValue::make(std::move(out), {xs.begin(), xs.end()}, [](Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      into_parent(self, k, [&](DenseMatrix& dst) {
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += self.grad[i];
      });
    }
  });
}

DiffValue sum(const DiffValue& x) {
  Real total = 0;
  for (Real v : x.value().values()) total += v;
  return DiffValue::make(DenseMatrix(1, 1, total), {x}, [](Node& self) {
    const Real g = self.grad[0];
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (auto& v : dst.values()) v += g;
    });
  });
}

DiffValue mean(const DiffValue& x) {
  if (x.value().empty()) throw ShapeError("mean: empty input");
  return scale(sum(x), Real(1) / static_cast<Real>(x.value().size()));
}

DiffValue row_sum(const DiffValue& x) {
  DenseMatrix out(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    Real acc = 0;
    for (Real v : x.value().row(r)) acc += v;
    out[r] = acc;
  }
  return DiffValue::make(std::move(out), {x}, [](Node& self) {
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t r = 0; r < dst.rows(); ++r)
        for (auto& v : dst.row(r)) v += self.grad[r];
    });
  });
}

DiffValue gather_rows(const DiffValue& x, const IndexArray& rows) {
  const std::size_t k = x.cols();
  DenseMatrix out(rows.size(), k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= x.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(rows[i]) + " out of range for " +
                       x.value().shape_string());
    }
    std::copy_n(x.value().data() + rows[i] * k, k, out.data() + i * k);
  }
  return DiffValue::make(std::move(out), {x}, [rows, k](Node& self) {
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        Real* d = dst.data() + rows[i] * k;
        const Real* g = self.grad.data() + i * k;
        for (std::size_t c = 0; c < k; ++c) d[c] += g[c];
      }
    });
  });
}

DiffValue concat_cols(std::span<const DiffValue> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  const std::size_t n = parts[0].rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rows() != n) throw ShapeError("concat_cols: row counts differ");
    total += p.cols();
  }
  DenseMatrix out(n, total);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    for (std::size_t r = 0; r < n; ++r)
      std::copy_n(p.value().data() + r * p.cols(), p.cols(), out.data() + r * total + offset);
    offset += p.cols();
  }
  return DiffValue::make(std::move(out), {parts.begin(), parts.end()}, [total](Node& self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      const std::size_t w = self.parents[k]->value.cols();
      into_parent(self, k, [&](DenseMatrix& dst) {
        for (std::size_t r = 0; r < dst.rows(); ++r)
          for (std::size_t c = 0; c < w; ++c) dst(r, c) += self.grad[r * total + off + c];
      });
      off += w;
    }
  });
}

// --- elementwise ------------------------------------------------------------

DiffValue elementwise(Elementwise kind, const DiffValue& x) {
  DenseMatrix out = x.value();
  for (auto& v : out.values()) {
    switch (kind) {
      case Elementwise::Relu: v = v < 0 ? Real(0) : v; break;  // NaN passes through
      case Elementwise::Elu: v = v > 0 ? v : std::expm1(v); break;
      case Elementwise::LeakyRelu: v = v > 0 ? v : kLeakySlope * v; break;
      case Elementwise::Sigmoid:
        v = v >= 0 ? Real(1) / (Real(1) + std::exp(-v)) : std::exp(v) / (Real(1) + std::exp(v));
        break;
      case Elementwise::Exp: v = std::exp(v); break;
      case Elementwise::Log: v = log_eps(v); break;
      case Elementwise::Square: v = v * v; break;
    }
  }
  return DiffValue::make(std::move(out), {x}, [kind](Node& self) {
    const DenseMatrix& in = self.parents[0]->value;
    const DenseMatrix& y = self.value;
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t i = 0; i < dst.size(); ++i) {
        const Real g = self.grad[i];
        Real d = 0;
        switch (kind) {
          case Elementwise::Relu: d = in[i] > 0 ? Real(1) : Real(0); break;
          case Elementwise::Elu: d = in[i] > 0 ? Real(1) : y[i] + Real(1); break;
          case Elementwise::LeakyRelu: d = in[i] > 0 ? Real(1) : kLeakySlope; break;
          case Elementwise::Sigmoid: d = y[i] * (Real(1) - y[i]); break;
          case Elementwise::Exp: d = y[i]; break;
          case Elementwise::Log: d = Real(1) / (in[i] + kLogEpsilon); break;
          case Elementwise::Square: d = Real(2) * in[i]; break;
        }
        dst[i] += g * d;
      }
    });
  });
}

DiffValue power(const DiffValue& x, int exponent) {
  if (exponent < 1) throw std::invalid_argument("power: exponent must be >= 1");
  DenseMatrix out = x.value();
  for (auto& v : out.values()) v = std::pow(v, exponent);
  return DiffValue::make(std::move(out), {x}, [exponent](Node& self) {
    const DenseMatrix& in = self.parents[0]->value;
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t i = 0; i < dst.size(); ++i) {
        const Real d = exponent == 1 ? Real(1) : exponent * std::pow(in[i], exponent - 1);
        dst[i] += self.grad[i] * d;
      }
    });
  });
}

// --- softmax family ---------------------------------------------------------

DiffValue row_softmax(const DiffValue& x) {
  DenseMatrix out = x.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    if (row.empty()) continue;
    const Real m = *std::max_element(row.begin(), row.end());
    Real z = 0;
    for (auto& v : row) {
      v = std::exp(v - m);
      z += v;
    }
    for (auto& v : row) v /= z;
  }
  return DiffValue::make(std::move(out), {x}, [](Node& self) {
    const DenseMatrix& y = self.value;
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t r = 0; r < y.rows(); ++r) {
        Real dot = 0;
        for (std::size_t c = 0; c < y.cols(); ++c) dot += self.grad(r, c) * y(r, c);
        for (std::size_t c = 0; c < y.cols(); ++c) dst(r, c) += y(r, c) * (self.grad(r, c) - dot);
      }
    });
  });
}

DiffValue row_log_softmax(const DiffValue& x) {
  DenseMatrix out = x.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    if (row.empty()) continue;
    const Real m = *std::max_element(row.begin(), row.end());
    Real z = 0;
    for (Real v : row) z += std::exp(v - m);
    const Real lse = m + std::log(z);
    for (auto& v : row) v -= lse;
  }
  return DiffValue::make(std::move(out), {x}, [](Node& self) {
    const DenseMatrix& y = self.value;
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t r = 0; r < y.rows(); ++r) {
        Real gsum = 0;
        for (std::size_t c = 0; c < y.cols(); ++c) gsum += self.grad(r, c);
        for (std::size_t c = 0; c < y.cols(); ++c)
          dst(r, c) += self.grad(r, c) - std::exp(y(r, c)) * gsum;
      }
    });
  });
}

DiffValue segment_softmax(const DiffValue& scores, const EdgeSegments& segments) {
  require_column("segment_softmax", scores);
  if (scores.rows() != segments.num_edges()) {
    throw ShapeError("segment_softmax: " + std::to_string(scores.rows()) + " scores for " +
                     std::to_string(segments.num_edges()) + " edges");
  }
  DenseMatrix out = scores.value();
  for (std::size_t s = 0; s < segments.num_segments(); ++s) {
    const std::size_t b = segments.begin(s);
    const std::size_t e = segments.end(s);
    if (b == e) continue;
    Real m = out[b];
    for (std::size_t i = b + 1; i < e; ++i) m = std::max(m, out[i]);
    Real z = 0;
    for (std::size_t i = b; i < e; ++i) {
      out[i] = std::exp(out[i] - m);
      z += out[i];
    }
    for (std::size_t i = b; i < e; ++i) out[i] /= z;
  }
  return DiffValue::make(std::move(out), {scores}, [segments](Node& self) {
    const DenseMatrix& y = self.value;
    const DenseMatrix& g = self.grad;
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t s = 0; s < segments.num_segments(); ++s) {
        const std::size_t b = segments.begin(s);
        const std::size_t e = segments.end(s);
        Real dot = 0;
        for (std::size_t i = b; i < e; ++i) dot += g[i] * y[i];
        for (std::size_t i = b; i < e; ++i) dst[i] += y[i] * (g[i] - dot);
      }
    });
  });
}

DiffValue segment_reduce(SegmentReduce kind, const DiffValue& x, const EdgeSegments& segments) {
  if (x.rows() != segments.num_edges()) {
    throw ShapeError("segment_reduce: " + std::to_string(x.rows()) + " rows for " +
                     std::to_string(segments.num_edges()) + " edges");
  }
  const std::size_t k = x.cols();
  const std::size_t n = segments.num_segments();
  DenseMatrix out(n, k);
  std::vector<std::size_t> argmax;
  if (kind == SegmentReduce::Max) argmax.assign(n * k, 0);
  const DenseMatrix& xv = x.value();
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t b = segments.begin(s);
    const std::size_t e = segments.end(s);
    if (b == e) continue;
    Real* o = out.data() + s * k;
    if (kind == SegmentReduce::Max) {
      for (std::size_t c = 0; c < k; ++c) {
        std::size_t best = b;
        for (std::size_t i = b + 1; i < e; ++i)
          if (xv(i, c) > xv(best, c)) best = i;
        o[c] = xv(best, c);
        argmax[s * k + c] = best;
      }
    } else {
      for (std::size_t i = b; i < e; ++i)
        for (std::size_t c = 0; c < k; ++c) o[c] += xv(i, c);
      if (kind == SegmentReduce::Mean) {
        const Real inv = Real(1) / static_cast<Real>(e - b);
        for (std::size_t c = 0; c < k; ++c) o[c] *= inv;
      }
    }
  }
  return DiffValue::make(
      std::move(out), {x}, [kind, segments, k, argmax = std::move(argmax)](Node& self) {
        const DenseMatrix& g = self.grad;
        into_parent(self, 0, [&](DenseMatrix& dst) {
          for (std::size_t s = 0; s < segments.num_segments(); ++s) {
            const std::size_t b = segments.begin(s);
            const std::size_t e = segments.end(s);
            if (b == e) continue;
            if (kind == SegmentReduce::Max) {
              for (std::size_t c = 0; c < k; ++c) dst(argmax[s * k + c], c) += g(s, c);
              continue;
            }
            const Real w = kind == SegmentReduce::Mean ? Real(1) / static_cast<Real>(e - b)
                                                       : Real(1);
            for (std::size_t i = b; i < e; ++i)
              for (std::size_t c = 0; c < k; ++c) dst(i, c) += w * g(s, c);
          }
        });
      });
}

// --- fused losses -----------------------------------------------------------

DiffValue softmax_cross_entropy(const DiffValue& logits, std::span<const int> labels,
                                const IndexArray& rows) {
  if (rows.empty()) throw ShapeError("softmax_cross_entropy: empty row set");
  if (labels.size() != logits.rows()) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                     " labels for " + logits.value().shape_string() + " logits");
  }
  const DenseMatrix& x = logits.value();
  const std::size_t c = x.cols();
  std::vector<int> picked(rows.size());
  DenseMatrix probs(rows.size(), c);
  Real total = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= c) {
      throw ShapeError("softmax_cross_entropy: label out of range at node " + std::to_string(r));
    }
    picked[i] = y;
    auto row = x.row(r);
    const Real m = *std::max_element(row.begin(), row.end());
    Real z = 0;
    for (std::size_t j = 0; j < c; ++j) {
      probs(i, j) = std::exp(row[j] - m);
      z += probs(i, j);
    }
    for (std::size_t j = 0; j < c; ++j) probs(i, j) /= z;
    total += m + std::log(z) - row[y];
  }
  const Real inv_n = Real(1) / static_cast<Real>(rows.size());
  return DiffValue::make(
      DenseMatrix(1, 1, total * inv_n), {logits},
      [rows, picked = std::move(picked), probs = std::move(probs), inv_n, c](Node& self) {
        const Real g = self.grad[0] * inv_n;
        into_parent(self, 0, [&](DenseMatrix& dst) {
          for (std::size_t i = 0; i < rows.size(); ++i) {
            Real* d = dst.data() + rows[i] * c;
            for (std::size_t j = 0; j < c; ++j) d[j] += g * probs(i, j);
            d[picked[i]] -= g;
          }
        });
      });
}

DiffValue sigmoid_cross_entropy(const DiffValue& logits, const DenseMatrix& targets,
                                const IndexArray& rows) {
  if (rows.empty()) throw ShapeError("sigmoid_cross_entropy: empty row set");
  if (!targets.same_shape(logits.value())) {
    throw ShapeError("sigmoid_cross_entropy: targets " + targets.shape_string() + " for logits " +
                     logits.value().shape_string());
  }
  const DenseMatrix& x = logits.value();
  const std::size_t c = x.cols();
  DenseMatrix residual(rows.size(), c);  // sigmoid(x) - t
  Real total = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    for (std::size_t j = 0; j < c; ++j) {
      const Real v = x(r, j);
      const Real t = targets(r, j);
      total += std::max(v, Real(0)) - v * t + std::log1p(std::exp(-std::abs(v)));
      const Real s = v >= 0 ? Real(1) / (Real(1) + std::exp(-v))
                            : std::exp(v) / (Real(1) + std::exp(v));
      residual(i, j) = s - t;
    }
  }
  const Real inv_n = Real(1) / static_cast<Real>(rows.size() * c);
  return DiffValue::make(DenseMatrix(1, 1, total * inv_n), {logits},
                         [rows, residual = std::move(residual), inv_n, c](Node& self) {
                           const Real g = self.grad[0] * inv_n;
                           into_parent(self, 0, [&](DenseMatrix& dst) {
                             for (std::size_t i = 0; i < rows.size(); ++i) {
                               Real* d = dst.data() + rows[i] * c;
                               for (std::size_t j = 0; j < c; ++j) d[j] += g * residual(i, j);
                             }
                           });
                         });
}

DiffValue kl_divergence(const DiffValue& target, const DiffValue& learner) {
  if (!target.value().same_shape(learner.value())) {
    throw ShapeError("kl_divergence: support mismatch (" + target.value().shape_string() +
                     " vs " + learner.value().shape_string() + ")");
  }
  const DenseMatrix& t = target.value();
  const DenseMatrix& q = learner.value();
  Real total = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    total += t[i] * (log_eps(t[i]) - log_eps(q[i]));
  }
  return DiffValue::make(DenseMatrix(1, 1, total), {target, learner}, [](Node& self) {
    const Real g = self.grad[0];
    const DenseMatrix& tv = self.parents[0]->value;
    const DenseMatrix& qv = self.parents[1]->value;
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += g * (log_eps(tv[i]) + tv[i] / (tv[i] + kLogEpsilon) - log_eps(qv[i]));
      }
    });
    into_parent(self, 1, [&](DenseMatrix& dst) {
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= g * tv[i] / (qv[i] + kLogEpsilon);
    });
  });
}

DiffValue bernoulli_kl_divergence(const DiffValue& target, const DiffValue& learner) {
  if (!target.value().same_shape(learner.value())) {
    throw ShapeError("bernoulli_kl_divergence: support mismatch (" +
                     target.value().shape_string() + " vs " + learner.value().shape_string() +
                     ")");
  }
  const DenseMatrix& t = target.value();
  const DenseMatrix& q = learner.value();
  Real total = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Real p = t[i];
    const Real np = Real(1) - p;
    total += p * (log_eps(p) - log_eps(q[i])) + np * (log_eps(np) - log_eps(Real(1) - q[i]));
  }
  return DiffValue::make(DenseMatrix(1, 1, total), {target, learner}, [](Node& self) {
    const Real g = self.grad[0];
    const DenseMatrix& tv = self.parents[0]->value;
    const DenseMatrix& qv = self.parents[1]->value;
    into_parent(self, 0, [&](DenseMatrix& dst) {
      for (std::size_t i = 0; i < dst.size(); ++i) {
        const Real p = tv[i];
        const Real np = Real(1) - p;
        dst[i] += g * (log_eps(p) + p / (p + kLogEpsilon) - log_eps(qv[i]) - log_eps(np) -
                       np / (np + kLogEpsilon) + log_eps(Real(1) - qv[i]));
      }
    });
    into_parent(self, 1, [&](DenseMatrix& dst) {
      for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += g * (-tv[i] / (qv[i] + kLogEpsilon) +
                       (Real(1) - tv[i]) / (Real(1) - qv[i] + kLogEpsilon));
      }
    });
  });
}

ALIGNAHEAD_NAMESPACE_END
