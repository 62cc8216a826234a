"""Worked scenarios (discrete three-point map, x**2/2 on [0, 1], successor on
the harmonic space) and the empirical comparison table."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from palab.conditions import (
    ConditionSpec,
    Family,
    check_condition,
    evaluate_condition,
    kernel,
    pa_ratio_profile,
    pointwise_terms,
    sample_pairs,
    tightest_constant,
)
from palab.maps import SelfMap, SquareHalfMap, SuccessorMap, TableMap
from palab.metric import (
    DEFAULT_GRID,
    DEFAULT_TRUNCATION,
    INF,
    HarmonicSpace,
    IntervalSpace,
    MetricSpace,
    discrete_space,
)
from palab.picard import check_summability_bound, find_fixed_points, run_picard
from palab.report import Measurement, approx, build_report, claim, exact
from palab.search import BOUNDARY, MEMBER, NON_MEMBER, _verdict, classify

PAPER = "paper"
DERIVED = "derived"
TRIVIAL = "trivial"

CLAIMED_SQUARE_HALF_ALPHA = 0.4
CLAIMED_CIRIC_K = 0.99


@dataclass
class ScenarioResult:
    scenario: str
    space: MetricSpace
    map: SelfMap
    measurements: list[Measurement] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    witness: object = None
    extra: dict = field(default_factory=dict)

    def add(self, m: Measurement) -> Measurement:
        self.measurements.append(m)
        return m

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.measurements if not m.discrepancy)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def failures(self) -> list[Measurement]:
        return [m for m in self.measurements if not m.passed and not m.discrepancy]

    def to_json(self) -> dict:
        return build_report(
            f"repro {self.scenario}",
            space=self.space,
            map=self.map,
            verdict=self.verdict,
            witness=self.witness,
            measurements=self.measurements,
            notes=self.notes,
            scenario=self.scenario,
            **self.extra,
        )


# ----------------------------------------------------------------------------

def example_discrete_instance() -> tuple[MetricSpace, TableMap]:
    space = discrete_space(3)
    return space, TableMap(space, (1, 2, 2))


def repro_example_discrete(H: int = 16) -> ScenarioResult:
    space, T = example_discrete_instance()
    res = ScenarioResult("example-discrete", space, T)
    pairs = [(0, 1), (0, 2), (1, 2)]
    expected = {(0, 1): (1.0, 1.0), (0, 2): (1.0, 1.0), (1, 2): (0.0, 0.5)}
    for pair in pairs:
        sums = pa_ratio_profile(space, T, *pair, H)
        S2, S1_2, _ = sums.at(2)
        lhs, rhs = S1_2, 0.5 * S2
        e_lhs, e_rhs = expected[pair]
        res.add(exact(f"pair {pair} n=2 LHS", lhs, e_lhs, PAPER))
        res.add(exact(f"pair {pair} n=2 RHS", rhs, e_rhs, PAPER))
        stable = bool(np.all(sums.S[1:] == S2) and np.all(sums.S1[1:] == S1_2))
        res.add(claim(f"pair {pair} sums constant for 2 <= n <= {H}", stable, True, stable, PAPER, 0.0))

    pa = check_condition(ConditionSpec.pa(0.5, 2, H), space, T, pairs)
    res.add(exact("PA(alpha=1/2, N=2) verdict", pa.verdict, "holds_on_sample", PAPER))
    ban = tightest_constant(Family.BANACH, space, T, pairs)
    res.add(exact("Banach tightest constant", ban.estimate, 1.0, PAPER))
    res.add(exact("Banach witness pair", list(ban.witness.pair), [0, 1], PAPER))
    k99 = check_condition(ConditionSpec(Family.BANACH, k=0.99), space, T, pairs)
    res.add(claim("Banach k=0.99 violated", k99.witness.to_json() if k99.witness else None, "violated at (0, 1)",
                  not k99.holds and k99.witness.pair == (0, 1), PAPER))
    alpha = tightest_constant(Family.PA, space, T, pairs, N=2, H=H)
    res.add(exact("PA tightest alpha at N=2", alpha.estimate, 0.5, DERIVED))

    trace = run_picard(space, T, 0)
    res.add(exact("Picard iterates from 0", trace.iterates, [0, 1, 2, 2], PAPER))
    res.add(exact("Picard limit", trace.limit_candidate, 2, PAPER))
    res.add(exact("Picard S_inf", float(trace.S[-1]), 2.0, DERIVED))
    bound = check_summability_bound(trace, 0.5, 2)
    res.add(exact("summability constant C", bound.C, 2.0, DERIVED))
    res.add(exact("summability bounds hold", bound.passed, True, DERIVED))
    res.add(exact("fixed points", find_fixed_points(space, T), [2], PAPER))
    res.witness = ban.witness
    res.extra["picard"] = trace.to_json()
    return res


# ----------------------------------------------------------------------------

def derivative_limit_ratio(n: int) -> float:
    """Limit of the PA ratio at step ``n`` for pairs collapsing onto ``x = y = 1``.

    ``(T^k)'(1) = 2^k / 2^(2^k - 1)`` so the ratio tends to
    ``sum_{k=1..n} c_k / sum_{k=0..n-1} c_k``.
    """
    c = [math.ldexp(1.0, k - (2**k - 1)) for k in range(n + 1)]
    return math.fsum(c[1:]) / math.fsum(c[:-1])


def square_half_instance(grid: int = DEFAULT_GRID) -> tuple[IntervalSpace, SquareHalfMap]:
    space = IntervalSpace(0.0, 1.0, grid)
    return space, SquareHalfMap(space)


def repro_square_half(grid: int = DEFAULT_GRID, seed: int = 0, H: int = 16, N: int = 5) -> ScenarioResult:
    space, T = square_half_instance(grid)
    res = ScenarioResult("square-half", space, T)

    # Kannan refutation at (1, 0)
    kan = evaluate_condition(ConditionSpec(Family.KANNAN, k=0.4), space, T, 1.0, 0.0)
    res.add(exact("Kannan (1,0): d(Tx,Ty)", kan.lhs, 0.5, PAPER))
    res.add(exact("Kannan (1,0): d(x,Tx)", space.distance(1.0, T.apply(1.0)), 0.5, PAPER))
    res.add(exact("Kannan (1,0): d(y,Ty)", space.distance(0.0, T.apply(0.0)), 0.0, PAPER))
    implied_k = kan.lhs / kan.kernel
    res.add(approx("Kannan (1,0): implied k", implied_k, 1.0, 1e-15, PAPER))
    res.add(claim("implied k contradicts k < 1/2", implied_k, ">= 0.5", implied_k >= 0.5, PAPER))

    # Banach ratio (x + y)/2 and its supremum
    pairs = sample_pairs(space, seed=seed)
    t = pointwise_terms(space, T, pairs)
    xy = np.array(pairs)
    ratio = t.dTT / t.dxy
    err = float(np.max(np.abs(ratio - xy.sum(axis=1) / 2)))
    res.add(approx("Banach ratio equals (x+y)/2 (max abs error)", err, 0.0, 1e-9, DERIVED))
    ban = tightest_constant(Family.BANACH, space, T, pairs)
    step = 1.0 / (grid - 1)
    res.add(claim("Banach sup over grid", ban.estimate, f">= 1 - {step}", ban.estimate >= 1 - step - 1e-12 and ban.estimate < 1, PAPER))

    # F-contraction with F = ln fails near (1, 1)
    window = sample_pairs(space, window=(0.99, 1.0))
    for tau in (0.1, 0.01, 0.001):
        rep = check_condition(ConditionSpec.f(tau, "log"), space, T, window)
        ok = (not rep.holds) and min(rep.witness.pair) >= 0.99 - 1e-12
        res.add(claim(f"F=ln, tau={tau}: violated near (1,1)", rep.witness.to_json() if rep.witness else None,
                      "violated with x, y >= 0.99", ok, PAPER))
    tau_hat = tightest_constant(Family.F, space, T, window, f_id="log").estimate
    res.add(claim("F=ln: largest admissible tau on [0.99,1]^2", tau_hat, "<= ln(2/1.98)",
                  tau_hat <= math.log(2 / 1.98) + 1e-9, DERIVED, 1e-9))

    # PA constant at N
    pa = tightest_constant(Family.PA, space, T, pairs, N=N, H=H)
    res.add(claim(f"PA tightest alpha at N={N}", pa.estimate, "in (0.55, 0.75)", 0.55 < pa.estimate < 0.75, DERIVED))
    oracle = derivative_limit_ratio(N)
    prof = pa_ratio_profile(space, T, 1.0, 0.999, H)
    rho = prof.at(N)[2]
    res.add(claim(f"ratio at (1, 0.999), n={N} vs derivative limit {oracle:.6f}", rho, round(oracle, 2),
                  round(rho, 2) == round(oracle, 2), DERIVED, 5e-3))
    res.add(claim(f"claimed alpha {CLAIMED_SQUARE_HALF_ALPHA} bounds the ratio for n >= {N}", pa.estimate,
                  f"<= {CLAIMED_SQUARE_HALF_ALPHA}", pa.estimate <= CLAIMED_SQUARE_HALF_ALPHA, PAPER,
                  discrepancy=True))
    res.notes.append(
        f"measured least alpha at N={N} is {pa.estimate:.6f} (pair {pa.witness.pair}, n={pa.witness.n}); "
        f"it exceeds the claimed {CLAIMED_SQUARE_HALF_ALPHA}; the derivative limit near x=y=1 is {oracle:.6f}. "
        "The map is still PA on the sample since the measured alpha is < 1."
    )
    res.witness = pa.witness

    trace = run_picard(space, T, 1.0)
    res.add(exact("Picard status from 1", trace.status.value, "converged", DERIVED))
    res.add(claim("Picard residual", trace.residual, "<= 1e-12", trace.residual <= 1e-12, DERIVED))
    tele = max(abs(trace.S_n(n) - (1 - 2.0 ** -(2**n - 1))) for n in range(1, 7))
    res.add(approx("S_n = 1 - 2^-(2^n - 1), n <= 6 (max error)", tele, 0.0, 1e-12, DERIVED))
    res.add(approx("S_inf", float(trace.S[-1]), 1.0, 1e-9, DERIVED))
    bound = check_summability_bound(trace, 0.7, 5)
    res.add(approx("summability constant C (alpha=0.7, N=5)", bound.C, 5 / 3, 1e-12, DERIVED))
    res.add(exact("summability bounds hold", bound.passed, True, DERIVED))
    res.notes.extend(pa.notes)
    res.extra["picard"] = trace.to_json()
    return res


# ----------------------------------------------------------------------------

def successor_instance(truncation: int = DEFAULT_TRUNCATION) -> tuple[HarmonicSpace, SuccessorMap]:
    space = HarmonicSpace(truncation)
    return space, SuccessorMap(space)


def closed_form_ratio(n: int) -> float:
    return 2 * n * n / (2 * n * n + 3 * n + 1)


def repro_successor_harmonic(n_max: int = 10_000, pair_max: int = 1000, pa_max: int = 500) -> ScenarioResult:
    space, T = successor_instance(max(DEFAULT_TRUNCATION, 2 * n_max + 2, 2 * pa_max + 2))
    res = ScenarioResult("successor-harmonic", space, T)

    worst_A = worst_A1 = worst_rho = 0.0
    rho = np.empty(n_max + 1)
    for n in range(1, n_max + 1):
        s, s1, r = pa_ratio_profile(space, T, n, n + 1, n).at(n)
        worst_A = max(worst_A, abs(s / n * 2 * n * n - 1))
        worst_A1 = max(worst_A1, abs(s1 / n * (n + 1) * (2 * n + 1) - 1))
        worst_rho = max(worst_rho, abs(r / closed_form_ratio(n) - 1))
        rho[n] = r
    res.add(approx(f"A_n = 1/(2n^2), n <= {n_max} (max rel error)", worst_A, 0.0, 1e-12, PAPER))
    res.add(approx(f"A1_n = 1/((n+1)(2n+1)), n <= {n_max} (max rel error)", worst_A1, 0.0, 1e-12, PAPER))
    res.add(approx(f"ratio = 2n^2/(2n^2+3n+1), n <= {n_max} (max rel error)", worst_rho, 0.0, 1e-12, DERIVED))
    s100 = pa_ratio_profile(space, T, 100, 101, 100).at(100)[0] / 100
    res.add(approx("A_100", s100, 5e-5, 1e-12, PAPER, relative=True))
    res.add(approx("ratio at n=10", rho[10], 200 / 231, 1e-12, DERIVED))
    if n_max >= 150:
        tail = float(rho[150:].min())
        res.add(claim("ratio >= 0.99 for n >= 150", tail, ">= 0.99", tail >= 0.99, PAPER))
    first = int(np.argmax(rho[1:] > 0.9)) + 1
    res.add(exact("smallest n with ratio > 0.9", first, 14, DERIVED))

    # Chatterjea on neighbouring pairs
    adj = [(n, n + 1) for n in range(1, pair_max + 1)]
    t = pointwise_terms(space, T, adj)
    chat = t.dTT / kernel(Family.CHATTERJEA, t)
    ns = np.arange(1, pair_max + 1)
    res.add(approx("Chatterjea ratio n/(2(n+1)) on (n, n+1) (max rel error)",
                   float(np.max(np.abs(chat / (ns / (2 * (ns + 1))) - 1))), 0.0, 1e-12, PAPER))
    sup = tightest_constant(Family.CHATTERJEA, space, T, adj).estimate
    coarse_sup = tightest_constant(Family.CHATTERJEA, space, T, adj[: pair_max // 10]).estimate
    boundary = _verdict(Family.CHATTERJEA, sup, coarse_sup)[0] == BOUNDARY
    res.add(claim("Chatterjea sup over (n, n+1), n <= %d" % pair_max, sup, "in (0.499, 0.5)", 0.499 < sup < 0.5, PAPER))
    res.add(claim("Chatterjea boundary flag", boundary, True, boundary, DERIVED))
    res.notes.append(
        f"Chatterjea: sup of n/(2(n+1)) over the sample is {sup:.6f}, increasing towards 1/2 and never "
        "reaching it, so no fixed k < 1/2 covers every neighbouring pair; verdict: boundary."
    )

    # Ciric per-pair ratio on all pairs m < n <= pair_max
    iu, ju = np.triu_indices(pair_max, 1)
    m_, n_ = iu + 1, ju + 1
    allp = list(zip(m_.tolist(), n_.tolist()))
    t = pointwise_terms(space, T, allp)
    cir = t.dTT / kernel(Family.CIRIC, t)
    closed = m_ * n_ / ((m_ + 1) * (n_ + 1))
    res.add(approx("Ciric ratio mn/((m+1)(n+1)) (max rel error)", float(np.max(np.abs(cir / closed - 1))),
                   0.0, 1e-12, PAPER))
    csup = float(cir.max())
    res.add(claim("Ciric sup < 1", csup, "< 1", csup < 1, PAPER))
    over = int((cir > CLAIMED_CIRIC_K).sum())
    res.add(claim(f"claimed k={CLAIMED_CIRIC_K} covers every pair", over, 0, over == 0, PAPER, discrepancy=True))
    res.notes.append(
        f"Ciric: {over} sampled pairs have ratio above the suggested k={CLAIMED_CIRIC_K}; sup {csup:.6f} "
        "tends to 1 so membership is a boundary case."
    )

    # PA refutation
    pa_pairs = [(n, n + 1) for n in range(1, pa_max + 1)]
    for alpha in (0.5, 0.9, 0.99):
        rep = check_condition(ConditionSpec.pa(alpha, 2, pa_max), space, T, pa_pairs)
        w = rep.witness
        if w is None:
            res.add(claim(f"PA alpha={alpha} violated", None, "violated", False, PAPER))
            continue
        p, n = w.pair[0], w.n
        lhs_cf = 1 / (p + 1) - 1 / (p + n + 1)
        rhs_cf = alpha * (1 / p - 1 / (p + n))
        err = max(abs(w.lhs / lhs_cf - 1), abs(w.rhs / rhs_cf - 1))
        res.add(claim(f"PA alpha={alpha} violated", w.to_json(), "violated", True, PAPER))
        res.add(approx(f"PA alpha={alpha} witness lhs/rhs vs closed form (max rel error)", err, 0.0, 1e-12, DERIVED))
        if alpha == 0.99:
            res.witness = w
    res.add(exact("fixed points", find_fixed_points(space, T, limit=pair_max), [INF], PAPER))
    return res


SCENARIOS = {
    "example-discrete": repro_example_discrete,
    "square-half": repro_square_half,
    "successor-harmonic": repro_successor_harmonic,
}


# ----------------------------------------------------------------------------
# comparison table

@dataclass
class Target:
    name: str
    space: MetricSpace
    map: SelfMap
    pairs: Sequence[tuple] | None = None
    pa_pairs: Sequence[tuple] | None = None
    N_range: Sequence[int] = (1, 2, 3, 4, 5)
    H: int | None = None
    coarse: "Target | None" = None


def _square_half_target(grid, seed, coarse=None):
    qs, qT = square_half_instance(grid)
    return Target("square-half", qs, qT, sample_pairs(qs, seed=seed), H=16, coarse=coarse)


def _successor_target(truncation, pair_max, coarse=None):
    hs, hT = successor_instance(max(truncation, 2 * pair_max + 2))
    return Target("successor-harmonic", hs, hT, sample_pairs(hs, limit=pair_max),
                  [(n, n + 1) for n in range(1, pair_max + 1)], H=pair_max, coarse=coarse)


def builtin_targets(grid: int = DEFAULT_GRID, truncation: int = DEFAULT_TRUNCATION, seed: int = 0,
                    pair_max: int = 1000) -> list[Target]:
    """The three worked instances; infinite ones carry a 10x coarser reference sample."""
    ds, dT = example_discrete_instance()
    coarse_grid = (grid - 1) // 10 + 1
    return [
        Target("example-discrete", ds, dT),
        _square_half_target(grid, seed, _square_half_target(coarse_grid, seed)),
        _successor_target(truncation, pair_max, _successor_target(truncation, pair_max // 10)),
    ]


FAMILY_ORDER = (Family.BANACH, Family.KANNAN, Family.CHATTERJEA, Family.CIRIC, Family.F, Family.PA)
FAMILY_LABEL = {
    Family.BANACH: "Banach",
    Family.KANNAN: "Kannan",
    Family.CHATTERJEA: "Chatterjea",
    Family.CIRIC: "Ciric",
    Family.F: "F",
    Family.PA: "PA",
}

# entries as stated in the source table; None marks an open problem
_STATED_IMPLIES_PA = {Family.BANACH: "Yes", Family.KANNAN: "No", Family.CHATTERJEA: "No",
                      Family.CIRIC: "No", Family.F: None}
_STATED_PA_IMPLIES = {Family.BANACH: "No", Family.KANNAN: "No", Family.CHATTERJEA: None,
                      Family.CIRIC: None, Family.F: "No"}


@dataclass
class ComparisonTable:
    targets: list[str]
    cells: dict  # (family, target) -> FamilyVerdict

    def verdict(self, family, target) -> str:
        return self.cells[(Family(family), target)].verdict

    def _cell(self, family, target) -> str:
        v = self.cells[(family, target)]
        c = v.constant
        cs = "inf" if math.isinf(c) else f"{c:.6g}"
        label = "tau" if family is Family.F else ("alpha" if family is Family.PA else "k")
        extra = f", N={v.N}" if family is Family.PA else ""
        return f"{v.verdict} ({label}={cs}{extra})"

    def _separations(self, hold: Family, fail: Family) -> list[str]:
        return [t for t in self.targets
                if self.cells[(hold, t)].verdict == MEMBER and self.cells[(fail, t)].verdict == NON_MEMBER]

    def relation_rows(self) -> list[tuple[str, dict]]:
        rows = []
        for title, stated, direction in (("Implies PA", _STATED_IMPLIES_PA, "to"),
                                         ("PA implies", _STATED_PA_IMPLIES, "from")):
            cells = {}
            for fam in FAMILY_ORDER[:-1]:
                sep = (self._separations(fam, Family.PA) if direction == "to"
                       else self._separations(Family.PA, fam))
                s = stated[fam]
                head = "open (paper)" if s is None else f"{s} (paper)"
                measured = f"separated by {', '.join(sep)}" if sep else "no separating target"
                cells[fam] = f"{head}; measured: {measured}"
            rows.append((title, cells))
        static = {fam: "No" for fam in FAMILY_ORDER[:-1]}
        rows.append(("Requires continuity (theorem hypothesis, not measured)",
                     {**static, Family.PA: "Yes (for fixed point)"}))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["family"]
        for t in self.targets:
            header += [f"{t}:verdict", f"{t}:constant", f"{t}:N"]
        w.writerow(header)
        for fam in FAMILY_ORDER:
            row = [fam.value]
            for t in self.targets:
                v = self.cells[(fam, t)]
                row += [v.verdict, repr(float(v.constant)), "" if v.N is None else v.N]
            w.writerow(row)
        return buf.getvalue()

    def to_markdown(self) -> str:
        lines = ["| family | " + " | ".join(self.targets) + " |",
                 "|---|" + "---|" * len(self.targets)]
        for fam in FAMILY_ORDER:
            lines.append(f"| {FAMILY_LABEL[fam]} | " + " | ".join(self._cell(fam, t) for t in self.targets) + " |")
        lines += ["", "| relation | " + " | ".join(FAMILY_LABEL[f] for f in FAMILY_ORDER) + " |",
                  "|---|" + "---|" * len(FAMILY_ORDER)]
        for title, cells in self.relation_rows():
            lines.append(f"| {title} | " + " | ".join(cells.get(f, "-") for f in FAMILY_ORDER) + " |")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "targets": self.targets,
            "rows": {fam.value: {t: self.cells[(fam, t)].to_json() for t in self.targets}
                     for fam in FAMILY_ORDER},
            "relations": {title: {f.value: c for f, c in cells.items()}
                          for title, cells in self.relation_rows()},
        }


def comparison_table(targets: Sequence[Target]) -> ComparisonTable:
    if not targets:
        raise ValueError("comparison_table needs at least one target")
    cells = {}
    for tg in targets:
        ref = None
        if tg.coarse is not None:
            cg = tg.coarse
            ref = classify(cg.space, cg.map, cg.N_range, cg.H, pairs=cg.pairs, pa_pairs=cg.pa_pairs)
        c = classify(tg.space, tg.map, tg.N_range, tg.H, pairs=tg.pairs, pa_pairs=tg.pa_pairs, coarse=ref)
        for fam in FAMILY_ORDER:
            cells[(fam, tg.name)] = c[fam]
    return ComparisonTable([t.name for t in targets], cells)
