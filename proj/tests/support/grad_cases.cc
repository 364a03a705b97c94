#include "grad_cases.h"

#include <cmath>

#include "spvs/gradients.h"
#include "spvs/ops.h"
#include "spvs/progressive.h"
#include "spvs/ssl.h"
#include "spvs/tokens.h"

namespace spvs::testing {

EncoderConfig TinyConfig() {
  EncoderConfig c;
  c.frame_dim = 8;
  c.word_dim = 6;
  c.video_layers = 2;
  c.text_layers = 1;
  c.heads = 2;
  c.ffn_dim = 12;
  c.vocab_size = 16;
  c.max_positions = 32;
  c.dropout = 0.0;
  c.stages = 3;
  return c;
}

void JitterParameters(Model& model, Rng& rng, double scale) {
  for (const std::string& name : model.store().names()) {
    Tensor t = model.store().Get(name);
    for (double& v : t.MutableData()) v += rng.Uniform(-scale, scale);
  }
}

Tensor RandomTensor(Shape shape, Rng& rng, double lo, double hi, bool requires_grad) {
  std::vector<double> v(NumElements(shape));
  for (double& x : v) x = rng.Uniform(lo, hi);
  return Tensor::FromData(std::move(shape), std::move(v), requires_grad);
}

GradCheckResult RunGradientCase(const GradCase& c, std::size_t points, std::uint64_t seed) {
  GradCheckResult worst;
  for (std::size_t p = 0; p < points; ++p) {
    Rng rng = Rng(seed).Stream(c.name, p);
    worst.Merge(c.run(rng));
  }
  return worst;
}

namespace {

using Inputs = std::vector<Tensor>;
using OpFn = std::function<Tensor(const Inputs&)>;

TokenSequence TinyTokens() {
  TokenSequence t;
  t.ids = {kClsId, 5, 6, kSepId, 7, 8, 9, kSepId, 10, kPadId, kPadId};
  for (int id : t.ids) t.is_word.push_back(id >= kReservedTokens ? 1 : 0);
  return t;
}

// Loss = sum(op(inputs) * W) for a fixed random W, so every output element
// carries a distinct upstream gradient.
GradCheckResult CheckOp(const Inputs& inputs, const OpFn& op, Rng& rng) {
  Tensor probe = op(inputs);
  Tensor weights = RandomTensor(probe.shape(), rng);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < inputs.size(); ++i) names.push_back("input" + std::to_string(i));
  GradCheckOptions opts;
  opts.coordinates = 8;
  return CheckGradients([&] { return Sum(Mul(op(inputs), weights)); }, inputs, names, rng, opts);
}

GradCase Op(std::string name, std::function<Inputs(Rng&)> make, OpFn op) {
  return {name, [make, op](Rng& rng) {
            Inputs in = make(rng);
            return CheckOp(in, op, rng);
          }};
}

Tensor R(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return RandomTensor(std::move(s), rng, lo, hi, true);
}

// Checks loss(model, extra) with respect to every parameter it reaches and
// every extra leaf.
GradCheckResult CheckModel(Rng& rng, const std::function<Inputs(Rng&)>& make_extra,
                           const std::function<Tensor(const Model&, const Inputs&)>& loss) {
  Model model(TinyConfig(), rng.NextU64());
  JitterParameters(model, rng);
  Inputs extra = make_extra(rng);
  auto fn = [&] { return loss(model, extra); };
  Gradients g = Backward(fn());
  std::vector<Tensor> leaves;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < model.store().size(); ++i) {
    if (g.Reached(model.store().tensors()[i])) {
      leaves.push_back(model.store().tensors()[i]);
      names.push_back(model.store().names()[i]);
    }
  }
  for (std::size_t i = 0; i < extra.size(); ++i) {
    if (extra[i].requires_grad()) {
      leaves.push_back(extra[i]);
      names.push_back("extra" + std::to_string(i));
    }
  }
  GradCheckOptions opts;
  opts.coordinates = 2;
  opts.directions = 3;
  return CheckGradients(fn, leaves, names, rng, opts);
}

GradCase ModelCase(std::string name, std::function<Inputs(Rng&)> make,
                   std::function<Tensor(const Model&, const Inputs&)> loss) {
  return {name, [make, loss](Rng& rng) { return CheckModel(rng, make, loss); }};
}

Tensor WeightedSum(const Tensor& x, std::uint64_t seed) {
  Rng rng(seed);
  return Sum(Mul(x, RandomTensor(x.shape(), rng)));
}

}  // namespace

std::vector<GradCase> AllGradientCases() {
  std::vector<GradCase> cases;
  auto two = [](Shape a, Shape b) {
    return [a, b](Rng& rng) { return Inputs{R(a, rng), R(b, rng)}; };
  };
  auto one = [](Shape a, double lo = -1.0, double hi = 1.0) {
    return [a, lo, hi](Rng& rng) { return Inputs{R(a, rng, lo, hi)}; };
  };

  cases.push_back(Op("matmul", two({3, 4}, {4, 5}), [](const Inputs& x) { return MatMul(x[0], x[1]); }));
  cases.push_back(Op("transpose", one({3, 4}), [](const Inputs& x) { return Transpose(x[0]); }));
  cases.push_back(Op("add", two({3, 4}, {3, 4}), [](const Inputs& x) { return Add(x[0], x[1]); }));
  cases.push_back(Op("add_scalar_broadcast", two({}, {3, 4}),
                     [](const Inputs& x) { return Add(x[0], x[1]); }));
  cases.push_back(Op("sub", two({3, 4}, {3, 4}), [](const Inputs& x) { return Sub(x[0], x[1]); }));
  cases.push_back(Op("sub_scalar_broadcast", two({3, 4}, {1}),
                     [](const Inputs& x) { return Sub(x[0], x[1]); }));
  cases.push_back(Op("mul", two({3, 4}, {3, 4}), [](const Inputs& x) { return Mul(x[0], x[1]); }));
  cases.push_back(Op("mul_scalar_broadcast", two({3, 4}, {}),
                     [](const Inputs& x) { return Mul(x[0], x[1]); }));
  cases.push_back(Op("add_row_vector", two({3, 4}, {4}),
                     [](const Inputs& x) { return AddRowVector(x[0], x[1]); }));
  cases.push_back(Op("scale_rows", two({3, 4}, {3}),
                     [](const Inputs& x) { return ScaleRows(x[0], x[1]); }));
  cases.push_back(Op("scale", one({3, 4}), [](const Inputs& x) { return Scale(x[0], -1.7); }));
  cases.push_back(Op("add_scalar", one({3, 4}), [](const Inputs& x) { return AddScalar(x[0], 0.3); }));
  cases.push_back(Op("negate", one({3, 4}), [](const Inputs& x) { return Negate(x[0]); }));
  cases.push_back(Op("sigmoid", one({3, 4}, -3, 3), [](const Inputs& x) { return Sigmoid(x[0]); }));
  cases.push_back(Op("relu", one({3, 4}), [](const Inputs& x) { return Relu(x[0]); }));
  cases.push_back(Op("gelu", one({3, 4}, -3, 3), [](const Inputs& x) { return Gelu(x[0]); }));
  cases.push_back(Op("exp", one({3, 4}), [](const Inputs& x) { return Exp(x[0]); }));
  cases.push_back(Op("log", one({3, 4}, 0.2, 3), [](const Inputs& x) { return Log(x[0]); }));
  cases.push_back(Op("sqrt", one({3, 4}, 0.2, 3), [](const Inputs& x) { return Sqrt(x[0]); }));
  cases.push_back(Op("square", one({3, 4}), [](const Inputs& x) { return Square(x[0]); }));
  cases.push_back(Op("clamp", one({3, 4}, -2, 2), [](const Inputs& x) { return Clamp(x[0], -1, 1); }));
  cases.push_back(Op("sum", one({3, 4}), [](const Inputs& x) { return Sum(x[0]); }));
  cases.push_back(Op("mean", one({3, 4}), [](const Inputs& x) { return Mean(x[0]); }));
  cases.push_back(Op("row_l2_norm", one({3, 4}), [](const Inputs& x) { return RowL2Norm(x[0]); }));
  cases.push_back(Op("l2_normalize_rows", one({3, 4}),
                     [](const Inputs& x) { return L2NormalizeRows(x[0]); }));
  cases.push_back(Op("softmax_rows", one({3, 5}, -2, 2),
                     [](const Inputs& x) { return SoftmaxRows(x[0]); }));
  cases.push_back(Op("softmax_rows_masked", one({3, 5}, -2, 2), [](const Inputs& x) {
    static const std::uint8_t valid[] = {1, 0, 1, 1, 0};
    return SoftmaxRows(x[0], valid);
  }));
  cases.push_back(Op("layer_norm_rows",
                     [](Rng& rng) { return Inputs{R({3, 5}, rng, -2, 2), R({5}, rng), R({5}, rng)}; },
                     [](const Inputs& x) { return LayerNormRows(x[0], x[1], x[2]); }));
  cases.push_back(Op("slice_rows", one({5, 3}), [](const Inputs& x) { return SliceRows(x[0], 1, 3); }));
  cases.push_back(Op("slice_cols", one({3, 5}), [](const Inputs& x) { return SliceCols(x[0], 2, 2); }));
  cases.push_back(Op("concat_rows", two({2, 3}, {4, 3}), [](const Inputs& x) {
    return ConcatRows(std::span<const Tensor>(x.data(), 2));
  }));
  cases.push_back(Op("concat_cols", two({3, 2}, {3, 4}), [](const Inputs& x) {
    return ConcatCols(std::span<const Tensor>(x.data(), 2));
  }));
  cases.push_back(Op("gather_rows", one({6, 3}), [](const Inputs& x) {
    static const int ids[] = {4, 0, 4, 2};
    return GatherRows(x[0], ids);
  }));
  cases.push_back(Op("reshape", one({3, 4}), [](const Inputs& x) { return Reshape(x[0], {2, 6}); }));
  cases.push_back(Op("dropout", one({4, 5}), [](const Inputs& x) {
    Rng rng(99);
    return Dropout(x[0], 0.3, rng);
  }));
  cases.push_back(Op("hausdorff_distance", two({5, 4}, {7, 4}),
                     [](const Inputs& x) { return HausdorffDistance(x[0], x[1]).distance; }));

  const std::size_t d = TinyConfig().frame_dim;
  const std::size_t w = TinyConfig().word_dim;
  auto frames = [d](std::size_t t) {
    return [d, t](Rng& rng) { return Inputs{R({t, d}, rng)}; };
  };
  cases.push_back(ModelCase("transformer_block", frames(5), [](const Model& m, const Inputs& x) {
    return WeightedSum(TransformerBlock(m.video_blocks()[0], m.config().heads, x[0], {}, {}), 1);
  }));
  cases.push_back(ModelCase("encode_video_with_cls", frames(5), [](const Model& m, const Inputs& x) {
    return WeightedSum(EncodeVideo(m, x[0], true), 2);
  }));
  cases.push_back(ModelCase("encode_text_with_padding", [](Rng&) { return Inputs{}; },
                            [](const Model& m, const Inputs&) {
                              return WeightedSum(EncodeText(m, TinyTokens().ids), 3);
                            }));
  cases.push_back(ModelCase("correspondence_logit",
                            [d, w](Rng& rng) { return Inputs{R({1, d}, rng), R({1, w}, rng)}; },
                            [](const Model& m, const Inputs& x) {
                              return CorrespondenceLogit(m, x[0], x[1]);
                            }));
  cases.push_back(ModelCase("map_text_to_visual", [w](Rng& rng) { return Inputs{R({4, w}, rng)}; },
                            [](const Model& m, const Inputs& x) {
                              return WeightedSum(MapTextToVisual(m, x[0]), 4);
                            }));
  cases.push_back(ModelCase("smooth_probability", [d](Rng& rng) { return Inputs{R({1, d}, rng)}; },
                            [](const Model& m, const Inputs& x) {
                              return SmoothProbability(m, x[0]);
                            }));
  cases.push_back(ModelCase("encode_window", frames(5), [](const Model& m, const Inputs& x) {
    return WeightedSum(EncodeWindow(m, x[0]), 5);
  }));

  // Full losses.
  cases.push_back(ModelCase("loss_coarse_L1", frames(6), [](const Model& m, const Inputs& x) {
    Tensor g = EncodeVideo(m, x[0], true);
    Tensor z = EncodeText(m, TinyTokens().ids);
    return Add(CoarseLoss(m, SliceRows(g, 0, 1), SliceRows(z, 0, 1), 1).loss,
               CoarseLoss(m, SliceRows(g, 0, 1), SliceRows(z, 0, 1), 0).loss);
  }));
  for (int label = 0; label <= 1; ++label) {
    cases.push_back(ModelCase("loss_fine_L2_y" + std::to_string(label), frames(6),
                              [label](const Model& m, const Inputs& x) {
                                const TokenSequence tok = TinyTokens();
                                Tensor g = EncodeVideo(m, x[0], true);
                                Tensor z = EncodeText(m, tok.ids);
                                std::vector<int> rows;
                                for (std::size_t i = 0; i < tok.is_word.size(); ++i) {
                                  if (tok.is_word[i]) rows.push_back(static_cast<int>(i));
                                }
                                Tensor mapped = MapTextToVisual(m, GatherRows(z, rows));
                                HausdorffResult h = HausdorffDistance(SliceRows(g, 1, 6), mapped);
                                // margin 4 keeps the hinge active for y = 0
                                return FineLoss(h.distance, label, label == 0 ? 4.0 : std::sqrt(2.0));
                              }));
  }
  cases.push_back(ModelCase("loss_recovery_L3",
                            [d](Rng& rng) {
                              return Inputs{R({7, d}, rng),
                                            Tensor::Scalar(static_cast<double>(rng.UniformInt(7)))};
                            },
                            [](const Model& m, const Inputs& x) {
                              const auto t = static_cast<std::size_t>(x[1].item());
                              MaskedFrames mf = MaskFrameAt(x[0], m.mask_token(), t);
                              Tensor g = EncodeVideo(m, mf.frames, true);
                              Recovery r = RecoverFrame(m, mf.frames, g, t, 2);
                              return RecoveryLoss(r.recovered, mf.original);
                            }));
  cases.push_back(ModelCase("loss_ssl_total",
                            [d](Rng& rng) {
                              return Inputs{R({7, d}, rng),
                                            Tensor::Scalar(static_cast<double>(rng.UniformInt(7))),
                                            Tensor::Scalar(static_cast<double>(rng.UniformInt(2)))};
                            },
                            [](const Model& m, const Inputs& x) {
                              SslConfig cfg;
                              cfg.window_radius = 2;
                              cfg.margin = 4.0;
                              PairSample s;
                              s.frames = x[0];
                              s.tokens = TinyTokens();
                              s.label = static_cast<int>(x[2].item());
                              return SslForward(m, s, static_cast<std::size_t>(x[1].item()), cfg)
                                  .loss;
                            }));
  cases.push_back(ModelCase("loss_summarizer_VS",
                            [d](Rng& rng) {
                              Inputs in{R({6, d}, rng)};
                              std::vector<double> target(6);
                              for (double& v : target) v = rng.Uniform();
                              in.push_back(Tensor::Vector(target));
                              return in;
                            },
                            [](const Model& m, const Inputs& x) {
                              const TokenSequence tok = TinyTokens();
                              ForwardResult r = SummarizerForward(m, x[0], 3, &tok);
                              return Add(VsLoss(r.final_scores, x[1].data()),
                                         VsLoss(r.final_scores, x[1].data(), 4));
                            }));
  return cases;
}

}  // namespace spvs::testing
