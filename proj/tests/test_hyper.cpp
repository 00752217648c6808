#include <gtest/gtest.h>

#include <random>

#include "coarse/hyper.hpp"
#include "coarse/spaces.hpp"

using namespace coarse;
using namespace coarse::hyper;

namespace {

const Poly t = Poly::variable();
const Poly2 k = Poly2(std::vector<Poly>{Poly(), Poly::constant(1)});

Poly c(long v) { return Poly::constant(v); }
Poly2 lift(const Poly& p) { return Poly2(p); }

SymbolicPoint point(std::vector<Poly> coords, Rational t0 = 1) { return SymbolicPoint{std::move(coords), t0}; }

Piece ray(std::string name, std::vector<Poly> coords, long from) {
  return Piece{std::move(name), PieceKind::ray, std::move(coords), from, 0, false};
}

const ParametricSpace& space(const std::string& name) {
  static std::map<std::string, ParametricSpace> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, descriptor(name)).first;
  return it->second;
}

/// The x-axis as a piece of the plane: {(s, 0) : s >= 0}.
ParametricSpace half_axis_plane() {
  ParametricSpace s{"axis", 2, Norm::euclidean, {0, 0}, {ray("axis", {t, Poly()}, 0)}};
  return s;
}

}  // namespace

TEST(Poly, CanonicalFormAndBoundedness) {
  EXPECT_TRUE(poly_is_bounded(c(5)));
  EXPECT_FALSE(poly_is_bounded(t));
  const Poly z = t * t - t * t;
  EXPECT_TRUE(z.is_zero());
  EXPECT_EQ(z.degree(), kZeroDegree);
  EXPECT_TRUE(poly_is_bounded(z));
  EXPECT_EQ(Poly({1, 2, 0, 0}).degree(), 1);
}

TEST(Poly, ArithmeticAndEvaluation) {
  const Poly p({Rational(1, 2), -3, 1});  // t^2 - 3t + 1/2
  EXPECT_EQ(p(Rational(4)), Rational(9, 2));
  EXPECT_DOUBLE_EQ(p.eval(4.0), 4.5);
  EXPECT_EQ(p.compose(t + c(1)), Poly({Rational(-3, 2), -1, 1}));
  EXPECT_EQ((p * c(2)).leading(), 2);
  EXPECT_EQ(Rational(3) * t, Poly({0, 3}));
}

TEST(Poly, ParseRational) {
  EXPECT_EQ(parse_rational("7"), 7);
  EXPECT_EQ(parse_rational("-3/2"), Rational(-3, 2));
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("-1.5"), Rational(-3, 2));
  EXPECT_EQ(to_string(Rational(6, 4)), "3/2");
  EXPECT_EQ(to_string(Rational(-4)), "-4");
  for (const char* bad : {"", "x", "1/0", "1.2/3", "--1", "1e5"}) EXPECT_THROW(parse_rational(bad), InputError) << bad;
}

TEST(Poly, FloorAndCeil) {
  EXPECT_EQ(floor_of(Rational(-3, 2)), -2);
  EXPECT_EQ(ceil_of(Rational(-3, 2)), -1);
  EXPECT_EQ(floor_of(Rational(7)), 7);
  EXPECT_EQ(ceil_of(Rational(7, 3)), 3);
}

TEST(Poly2, SubstitutionAndIntegrality) {
  const Poly2 f = lift(t) + k * k;  // t + k^2
  EXPECT_EQ(f(Rational(2), Rational(3)), 11);
  EXPECT_EQ(f.k_degree(), 2);
  EXPECT_EQ(f.t_degree(), 1);
  EXPECT_EQ(f.at_k(t), t * t + t);
  EXPECT_EQ(f.shifted(), lift(t + c(1)) + k * k + Poly2(Rational(2) * Poly::constant(1)) * k);
  // k(k+1)/2 is integer-valued, k/2 is not.
  EXPECT_TRUE(integer_valued(Poly2(Poly::constant(Rational(1, 2))) * k * (k + lift(c(1)))));
  EXPECT_FALSE(integer_valued(Poly2(Poly::constant(Rational(1, 2))) * k));
}

TEST(Deciders, Univariate) {
  EXPECT_EQ(nonneg_on_integers(t - c(3), 3).verdict, Verdict::proved);
  const auto d = nonneg_on_integers(t - c(3), 1);
  EXPECT_EQ(d.verdict, Verdict::refuted);
  EXPECT_EQ(*d.t, 1);
  // (t - 5/2)^2 - 1/8 is negative only near t = 5/2, never at an integer.
  const Poly q = (t - Poly::constant(Rational(5, 2))) * (t - Poly::constant(Rational(5, 2))) - Poly::constant(Rational(1, 8));
  EXPECT_EQ(nonneg_on_integers(q, 0).verdict, Verdict::proved);
  EXPECT_FALSE(nonneg_on_integers(c(-1) * t * t + c(1000) * t, 1).ok());
}

TEST(Deciders, Bivariate) {
  // t - k >= 0 for k <= t.
  EXPECT_TRUE(nonneg_on_domain(lift(t) - k, 1, t).ok());
  const auto bad = nonneg_on_domain(lift(t) - k, 1, t + c(1));
  EXPECT_FALSE(bad.ok());
  ASSERT_TRUE(bad.t && bad.k);
  EXPECT_LT(Poly2(lift(t) - k)(*bad.t, *bad.k), 0);
  // k(t - k) >= 0 on 0..t: concave in k, endpoints zero.
  EXPECT_EQ(nonneg_on_domain(k * (lift(t) - k), 1, t).verdict, Verdict::proved);
}

TEST(FinitelyClose, Examples) {
  EXPECT_TRUE(finitely_close(point({t, t}), point({t + c(1), t})));
  EXPECT_FALSE(finitely_close(point({t, t}), point({c(-1) * t, t})));
  EXPECT_TRUE(finitely_close(point({c(-1), t}), point({c(1), t})));
  EXPECT_THROW(finitely_close(point({t}), point({t, t})), InputError);
}

TEST(IsInfinite, Examples) {
  EXPECT_TRUE(is_infinite(point({t}), space("line")));
  EXPECT_FALSE(is_infinite(point({c(7)}), space("line")));
  EXPECT_THROW(is_infinite(point({t, c(1)}), space("vase")), InputError);
  EXPECT_THROW(is_infinite(point({t}), space("vase")), InputError);
}

TEST(Membership, FlaredArmOnlyAtZeroStep) {
  const auto& fv = space("flared_vase");
  const Piece& left = fv.pieces[fv.piece_index("left")];
  const std::vector<Poly2> f{k - lift(t), lift(t)};
  EXPECT_TRUE(membership_check({f, 1, Poly()}, left).holds);
  const auto m = membership_check({f, 1, t}, left);
  EXPECT_FALSE(m.holds);
  ASSERT_TRUE(m.t && m.k);
  EXPECT_NE(*m.k, 0);
}

TEST(Membership, DiagonalWalkStaysOnTheArm) {
  const auto& fv = space("flared_vase");
  const Piece& right = fv.pieces[fv.piece_index("right")];
  const std::vector<Poly2> f{lift(t) + k, lift(t) + k};
  const auto m = membership_check({f, 1, t * t - t}, right);
  EXPECT_TRUE(m.holds);
  EXPECT_EQ(m.verdict, Verdict::proved);
}

TEST(Membership, OffAxisFormulaFails) {
  const auto axis = half_axis_plane();
  const auto m = membership_check({{k, lift(t)}, 1, t}, axis.pieces[0]);
  EXPECT_FALSE(m.holds);
  EXPECT_TRUE(m.t.has_value());
}

TEST(Membership, SegmentRangeAndLattice) {
  const auto& vase = space("vase");
  const Piece& base = vase.pieces[vase.piece_index("base")];
  // (k - 1, 1) for k = 0..2 sits on the base; k = 0..3 overshoots.
  EXPECT_TRUE(membership_check({{k - lift(c(1)), lift(c(1))}, 1, c(2)}, base).holds);
  EXPECT_FALSE(membership_check({{k - lift(c(1)), lift(c(1))}, 1, c(3)}, base).holds);
  const auto& grid = space("grid2d");
  EXPECT_TRUE(on_space(FormulaDomain{{lift(t) - k, lift(t)}, 1, t}, grid).holds);
  EXPECT_FALSE(on_space(FormulaDomain{{lift(Poly::constant(Rational(1, 2)) * t), lift(t)}, 1, Poly()}, grid).holds);
}

TEST(ChainSchema, LatticeRectangleVerifies) {
  const auto certs = certificates("grid2d");
  const auto it = std::find_if(certs.schemas.begin(), certs.schemas.end(),
                               [](const ChainSchema& s) { return s.name == "rectangle"; });
  ASSERT_NE(it, certs.schemas.end());
  EXPECT_EQ(it->scale, 1);
  const auto r = verify_chain_schema(*it, space("grid2d"));
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(r.symbolic);
  EXPECT_EQ(r.first_failure(), nullptr);
}

TEST(ChainSchema, VaseRungVerifies) {
  const auto certs = certificates("vase");
  ASSERT_EQ(certs.schemas.size(), 1u);
  const auto& rung = certs.schemas[0];
  EXPECT_EQ(rung.scale, 2);
  EXPECT_EQ(rung.escape_bound, t - c(1));
  const auto r = verify_chain_schema(rung, space("vase"));
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(finitely_close(rung.start(), point({c(-1), t})));
  EXPECT_TRUE(finitely_close(rung.end(), point({c(1), t})));
}

TEST(ChainSchema, VaseRungFailsBelowTheWidth) {
  auto rung = certificates("vase").schemas[0];
  rung.scale = Rational(19, 10);
  const auto r = verify_chain_schema(rung, space("vase"));
  EXPECT_FALSE(r.ok);
  ASSERT_NE(r.first_failure(), nullptr);
  EXPECT_EQ(r.first_failure()->clause, "step_bound");
}

TEST(ChainSchema, FlaredVaseCannotBeCrossedAtTwo) {
  // Down the right arm from (2t, 2t) to (t, t), across, up the left arm.
  ChainSchema s{"across", 2, 1, Poly::constant(Rational(1, 2)) * t, {}};
  s.segments.push_back({{lift(c(2) * t) - k, lift(c(2) * t) - k}, t});
  s.segments.push_back({{lift(t) - lift(c(2) * t) * k, lift(t)}, c(1)});
  s.segments.push_back({{c(-1) * lift(t) - k, lift(t) + k}, t});
  const auto r = verify_chain_schema(s, space("flared_vase"));
  EXPECT_FALSE(r.ok);
  const auto* f = r.first_failure();
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(f->segment, 1u);
  ASSERT_TRUE(f->t.has_value());

  // The matching gap certificate confirms the refutation at R = 2.
  GapCertificate gap{"arms", 2, {"left"}, {"right"}, Poly::constant(2), false};
  const auto g = verify_gap_certificate(gap, space("flared_vase"));
  EXPECT_TRUE(g.separates());
}

TEST(ChainSchema, Evaluation) {
  const auto rung = certificates("vase").schemas[0];
  const auto pts = evaluate_chain(rung, 5);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts.front(), (std::vector<Rational>{-1, 5}));
  EXPECT_EQ(pts.back(), (std::vector<Rational>{1, 5}));
}

TEST(GapCertificate, Examples) {
  const auto fv = verify_gap_certificate({"arms", 3, {"left"}, {"right"}, Poly::variable(), false}, space("flared_vase"));
  EXPECT_TRUE(fv.holds);
  EXPECT_TRUE(fv.diverging);
  EXPECT_FALSE(fv.sampled);
  // Cross distance outside B(xi, 3) is at least sqrt(2) * 3.
  EXPECT_GE(fv.min_distance, std::sqrt(2.0) * 3 - 1e-9);

  for (long m0 : {0L, 3L, 50L}) {
    const auto v = verify_gap_certificate({"arms", 3, {"left"}, {"right"}, Poly::constant(m0), false}, space("vase"));
    EXPECT_FALSE(v.holds) << m0;
    EXPECT_NEAR(v.min_distance, 2.0, 1e-9);
  }

  const auto line = verify_gap_certificate({"rays", 1, {"positive"}, {"negative"}, Poly::constant(1), false},
                                           space("line"));
  EXPECT_TRUE(line.separates());
  EXPECT_NEAR(line.min_distance, 2.0, 1e-9);
}

TEST(GapCertificate, SupNormNeedsSampledFallback) {
  ParametricSpace s{"sup", 2, Norm::sup, {0, 0}, {ray("e", {t, Poly()}, 0), ray("n", {Poly(), t}, 0)}};
  GapCertificate gap{"quadrant", 1, {"e"}, {"n"}, Poly::constant(2), false};
  EXPECT_THROW(verify_gap_certificate(gap, s), InputError);
  gap.sampled_fallback = true;
  const auto sampled = verify_gap_certificate(gap, s);
  EXPECT_TRUE(sampled.holds);
  EXPECT_TRUE(sampled.sampled);
}

TEST(IotaReport, PaperExamples) {
  const std::map<std::string, std::size_t> expected{{"line", 2}, {"grid2d", 1}, {"vase", 1}, {"flared_vase", 2}};
  for (const auto& [name, classes] : expected) {
    const auto rep = iota_report(space(name), certificates(name));
    EXPECT_EQ(rep.classes.size(), classes) << name;
    EXPECT_TRUE(rep.exact) << name;
    for (const auto& p : rep.pairs) EXPECT_NE(p.status, PairStatus::unknown) << name;
  }
}

TEST(IotaReport, MissingCertificatesLeavePairsUnknown) {
  auto certs = certificates("flared_vase");
  certs.gaps.clear();
  const auto rep = iota_report(space("flared_vase"), certs);
  EXPECT_FALSE(rep.exact);
  EXPECT_EQ(rep.classes.size(), 2u);
  EXPECT_EQ(rep.pairs.front().status, PairStatus::unknown);
}

TEST(IotaReport, FiniteRepresentativeRejected) {
  Certificates certs{{{"seven", point({c(7)})}}, {}, {}};
  EXPECT_THROW(iota_report(space("line"), certs), InputError);
}

TEST(IotaReport, ConflictingCertificatesRaise) {
  // Sound certificates cannot conflict, so the gap result is forged: the
  // vase rung connects the arms while the gap claims to separate them.
  const auto& vase = space("vase");
  auto certs = certificates("vase");
  certs.gaps.push_back({"forged", 3, {"left"}, {"right"}, Poly::constant(3), false});
  GapResult forged;
  forged.name = "forged";
  forged.holds = forged.diverging = true;
  std::vector<SchemaResult> schemas{verify_chain_schema(certs.schemas[0], vase)};
  ASSERT_TRUE(schemas[0].ok);
  EXPECT_THROW(classify(vase, certs, schemas, {forged}), InconsistentCertificates);
  EXPECT_THROW(classify(vase, certs, schemas, {}), InputError);
  // The honest verdict on the same certificate does not separate.
  EXPECT_FALSE(iota_report(vase, certs).gaps.back().separates());
}

TEST(IotaReport, GapRefusesUnboundedPiecesOutsideBothSides) {
  // Opposite rays inside the whole plane: the plane piece lies in neither
  // side, so no separation is certified even though the rays diverge.
  ParametricSpace s{"rays_in_plane", 2, Norm::euclidean, {0, 0},
                    {ray("pos", {t, Poly()}, 0), ray("neg", {c(-1) * t, Poly()}, 0),
                     Piece{"plane", PieceKind::ambient, {}, 0, 0, false}}};
  ChainSchema arc{"arc", 1, 1, t, {}};
  arc.segments.push_back({{lift(t), k}, t});
  arc.segments.push_back({{lift(t) - k, lift(t)}, c(2) * t});
  arc.segments.push_back({{c(-1) * lift(t), lift(t) - k}, t});
  Certificates certs{{{"plus", point({t, Poly()})}, {"minus", point({c(-1) * t, Poly()})}},
                     {arc},
                     {{"split", 1, {"pos"}, {"neg"}, Poly::constant(1), false}}};
  const auto rep = iota_report(s, certs);
  EXPECT_TRUE(rep.schemas[0].ok);
  EXPECT_FALSE(rep.gaps[0].separates());
  EXPECT_EQ(rep.gaps[0].uncovered, (std::vector<std::string>{"plane"}));
  EXPECT_EQ(rep.classes.size(), 1u);
}

TEST(Transport, SimilarityScalesTheSchema) {
  // Rotation by a quarter turn composed with scaling by 2.
  const Similarity f({{0, -2}, {2, 0}}, {3, 4});
  EXPECT_EQ(f.factor(), 2);
  const auto moved = transport(space("vase"), f);
  const auto rung = transport(certificates("vase").schemas[0], f);
  EXPECT_EQ(rung.scale, 4);
  const auto r = verify_chain_schema(rung, moved);
  EXPECT_TRUE(r.ok);
  // Not verified at the original scale.
  auto tight = rung;
  tight.scale = 2;
  EXPECT_FALSE(verify_chain_schema(tight, moved).ok);
}

TEST(Transport, Rejections) {
  EXPECT_THROW(Similarity({{1, 1}, {0, 1}}, {0, 0}), InputError);
  EXPECT_THROW(Similarity({{1, 1}, {-1, 1}}, {0, 0}), InputError);  // factor sqrt 2
  EXPECT_THROW(Similarity({{0, 0}, {0, 0}}, {0, 0}), InputError);
  EXPECT_THROW(transport(space("grid2d"), Similarity({{1, 0}, {0, 1}}, {0, 0})), InputError);
}

TEST(Validate, RejectsMalformedSpaces) {
  ParametricSpace s = space("vase");
  s.basepoint = {5, 5};
  EXPECT_THROW(validate(s), InputError);
  s = space("vase");
  s.pieces.push_back(s.pieces.front());
  EXPECT_THROW(validate(s), InputError);
  s = space("vase");
  s.pieces[s.piece_index("base")].coords = {t * t, c(1)};
  EXPECT_THROW(validate(s), InputError);
}

// ---------------------------------------------------------------- properties

namespace {

Poly random_poly(std::mt19937_64& rng, int max_degree, int span) {
  std::vector<Rational> c(static_cast<std::size_t>(rng() % (max_degree + 1)) + 1);
  for (auto& x : c) x = Rational(static_cast<long>(rng() % (2 * span + 1)) - span, 1 + static_cast<long>(rng() % 3));
  return Poly(std::move(c));
}

}  // namespace

TEST(HyperProperties, RingLawsAndEvaluation) {
  std::mt19937_64 rng(51);
  for (int round = 0; round < 200; ++round) {
    const Poly a = random_poly(rng, 4, 9), b = random_poly(rng, 4, 9), d = random_poly(rng, 2, 5);
    EXPECT_EQ(a * (b + d), a * b + a * d);
    EXPECT_EQ(a + b, b + a);
    EXPECT_TRUE((a - a).is_zero());
    const Rational x(static_cast<long>(rng() % 21) - 10, 1 + static_cast<long>(rng() % 4));
    EXPECT_EQ((a * b)(x), a(x) * b(x));
    EXPECT_EQ(a.compose(b)(x), a(b(x)));
    if (!a.is_zero() && !b.is_zero()) {
      EXPECT_EQ((a * b).degree(), a.degree() + b.degree());
    }
  }
}

TEST(HyperProperties, FinitelyCloseReflexiveSymmetric) {
  std::mt19937_64 rng(52);
  for (int round = 0; round < 200; ++round) {
    const SymbolicPoint p = point({random_poly(rng, 2, 3), random_poly(rng, 2, 3)});
    const SymbolicPoint q = point({random_poly(rng, 2, 3), random_poly(rng, 2, 3)});
    EXPECT_TRUE(finitely_close(p, p));
    EXPECT_EQ(finitely_close(p, q), finitely_close(q, p));
    // Close exactly when the coordinate differences are all constant.
    bool constant_gap = true;
    for (std::size_t i = 0; i < 2; ++i) constant_gap = constant_gap && (p.coords[i] - q.coords[i]).is_constant();
    EXPECT_EQ(finitely_close(p, q), constant_gap);
  }
}

TEST(HyperProperties, UnivariateDeciderSound) {
  std::mt19937_64 rng(53);
  for (int round = 0; round < 400; ++round) {
    const Poly q = random_poly(rng, 3, 12);
    const Rational t0(static_cast<long>(rng() % 6));
    const auto d = nonneg_on_integers(q, t0);
    bool negative = false;
    for (long x = static_cast<long>(t0); x <= static_cast<long>(t0) + 500 && !negative; ++x) negative = q(Rational(x)) < 0;
    if (negative) {
      EXPECT_FALSE(d.ok()) << "round " << round;
    }
    if (!d.ok()) {
      ASSERT_TRUE(d.t.has_value());
      EXPECT_LT(q(*d.t), 0) << "round " << round;
      EXPECT_GE(*d.t, t0);
    }
  }
}

TEST(HyperProperties, BivariateDeciderSound) {
  std::mt19937_64 rng(54);
  for (int round = 0; round < 80; ++round) {
    Poly2 f;
    for (int i = 0; i < 3; ++i) f = f + Poly2(random_poly(rng, 2, 6)) * (i == 0 ? lift(c(1)) : i == 1 ? k : k * k);
    const Poly kmax = round % 3 == 0 ? Poly::constant(static_cast<long>(rng() % 10)) : t + c(static_cast<long>(rng() % 4));
    const auto d = nonneg_on_domain(f, 1, kmax);
    bool negative = false;
    for (long x = 1; x <= 40 && !negative; ++x)
      for (long j = 0; j <= static_cast<long>(floor_of(kmax(Rational(x)))) && !negative; ++j)
        negative = f(Rational(x), Rational(j)) < 0;
    if (negative) {
      EXPECT_FALSE(d.ok()) << "round " << round;
    }
    if (!d.ok() && d.t && d.k) {
      EXPECT_LT(f(*d.t, *d.k), 0) << "round " << round;
    }
  }
}

TEST(HyperProperties, ShippedSchemasAreConcreteChains) {
  for (const auto& name : descriptor_names()) {
    const auto& sp = space(name);
    for (const auto& schema : certificates(name).schemas) {
      ASSERT_TRUE(verify_chain_schema(schema, sp).ok) << schema.name;
      for (long mult : {1L, 2L, 10L}) {
        const Rational tv = schema.t0 * mult;
        const auto pts = evaluate_chain(schema, tv);
        const double R = schema.scale.convert_to<double>();
        const double g = schema.escape_bound(tv).convert_to<double>();
        for (std::size_t i = 0; i < pts.size(); ++i) {
          double step = 0, radius = 0;
          for (std::size_t j = 0; j < sp.dim; ++j) {
            const double x = pts[i][j].convert_to<double>();
            const double base = sp.basepoint[j].convert_to<double>();
            const double dx = i + 1 < pts.size() ? pts[i + 1][j].convert_to<double>() - x : 0.0;
            if (sp.norm == Norm::sup) {
              step = std::max(step, std::abs(dx));
              radius = std::max(radius, std::abs(x - base));
            } else {
              step += dx * dx;
              radius += (x - base) * (x - base);
            }
          }
          if (sp.norm == Norm::euclidean) {
            step = std::sqrt(step);
            radius = std::sqrt(radius);
          }
          EXPECT_LE(step, R * (1 + 1e-9)) << schema.name << " t=" << mult;
          EXPECT_GE(radius, g * (1 - 1e-9)) << schema.name << " t=" << mult;
        }
      }
    }
  }
}

TEST(HyperProperties, VerifiedGapsSurviveDiscretizedSearch) {
  for (const char* name : {"line", "flared_vase"}) {
    const auto& sp = space(name);
    for (const auto& gap : certificates(name).gaps) {
      const auto g = verify_gap_certificate(gap, sp);
      ASSERT_TRUE(g.separates()) << gap.name;
      const double R = gap.scale.convert_to<double>();
      auto sample = [&](const std::vector<std::string>& side) {
        std::vector<std::vector<double>> pts;
        for (const auto& piece_name : side) {
          const Piece& p = sp.pieces[sp.piece_index(piece_name)];
          for (double s = p.from.convert_to<double>(); s <= 80.0; s += 0.1) {
            std::vector<double> x;
            for (const auto& coord : p.coords) x.push_back(coord.eval(s));
            pts.push_back(std::move(x));
          }
        }
        return pts;
      };
      const auto A = sample(gap.first), B = sample(gap.second);
      auto radius = [&](const std::vector<double>& x) {
        double acc = 0;
        for (std::size_t j = 0; j < x.size(); ++j) {
          const double d = x[j] - sp.basepoint[j].convert_to<double>();
          acc += d * d;
        }
        return std::sqrt(acc);
      };
      for (double m : {g.threshold_radius, 2 * g.threshold_radius + 1, 30.0}) {
        double best = kInfinity;
        for (const auto& a : A) {
          if (radius(a) < m) continue;
          for (const auto& b : B) {
            if (radius(b) < m) continue;
            double acc = 0;
            for (std::size_t j = 0; j < a.size(); ++j) acc += (a[j] - b[j]) * (a[j] - b[j]);
            best = std::min(best, std::sqrt(acc));
          }
        }
        EXPECT_GT(best, R) << gap.name << " m=" << m;
      }
    }
  }
}

TEST(HyperProperties, SimilarityTransportKeepsSchemasVerified) {
  // Pythagorean rotations give rational similarity factors.
  const std::vector<Similarity> maps{
      Similarity({{3, -4}, {4, 3}}, {1, -2}), Similarity({{0, 1}, {1, 0}}, {0, 0}),
      Similarity({{-1, 0}, {0, -1}}, {7, 7}), Similarity({{Rational(5, 13), Rational(-12, 13)}, {Rational(12, 13), Rational(5, 13)}}, {0, 0})};
  for (const auto& f : maps) {
    for (const char* name : {"vase", "flared_vase"}) {
      const auto moved = transport(space(name), f);
      for (const auto& schema : certificates(name).schemas) {
        const auto image = transport(schema, f);
        EXPECT_EQ(image.scale, f.factor() * schema.scale);
        EXPECT_TRUE(verify_chain_schema(image, moved).ok) << name << " " << schema.name;
      }
      const auto rep = iota_report(moved, [&] {
        auto certs = certificates(name);
        for (auto& r : certs.representatives) r.point.coords = f.apply(r.point.coords);
        for (auto& s : certs.schemas) s = transport(s, f);
        for (auto& g : certs.gaps) {
          g.scale = f.factor() * g.scale;
          g.threshold = f.factor() * g.threshold.compose(Poly::constant(1 / f.factor()) * t);
        }
        return certs;
      }());
      EXPECT_EQ(rep.classes.size(), iota_report(space(name), certificates(name)).classes.size()) << name;
    }
  }
}
