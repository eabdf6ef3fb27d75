"""Nash-equilibrium computation for teamwork games.

The aggregative-game route: instead of best responses to opponents, each
player has a replacement map ``r_i(G)`` giving the contribution consistent
with an equilibrium whose team outcome is ``G``.  Equilibrium aggregates are
the fixed points of ``R(G) = CES(r_1(G), ..., r_n(G))``.

Task regimes:

* additive (rho = 1): ``r_i(G) = max(0, p_i*dt - (alpha/beta_i) * sigma/sigma')``,
  a closed form; the fixed point is found by a bracket scan plus bisection.
* conjunctive (rho < 1, rho != 0): ``r_i`` solves the implicit first-order
  condition ``sigma/sigma' * G**(rho-1) = (dt - r/p) * (beta*p/alpha) * r**(rho-1)``,
  a strictly decreasing one-dimensional root problem solved in log space so
  |rho| = 500 stays finite.
* disjunctive (rho > 1): the replacement map is a correspondence with a zero
  branch and a positive branch.  Equilibria are enumerated over candidate
  active sets using share functions ``s_i(G) = beta_i * r_i(G)**rho / G**rho``,
  which must sum to one over the active players.

Leisure capacity scales every utility by ``p_L**alpha`` and therefore never
moves an argmax; all solver internals use the normalised leisure
``dt - g/p``.  Solvers are deterministic pure computations; independent
games may be solved concurrently.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    InputError,
    NoEquilibriumError,
    RegimeError,
    UnsupportedEvaluationError,
    WrongSolverError,
)
from .evaluation import eval_score, score_scalar, ratio_scalar
from .games import GameSpec, JointAction, ces_aggregate, ces_aggregate_grid, gifts_from_actions

# Absolute tolerance on work units for branch and boundary comparisons.
BOUNDARY_TOL = 1e-10

# Fixed-point residual targets.
FIXED_POINT_TOL = 1e-8


@dataclass(frozen=True)
class EquilibriumResult:
    """One pure-strategy Nash equilibrium of a teamwork game."""

    actions: tuple[float, ...]
    gifts: tuple[float, ...]
    aggregate_G: float
    score: float
    active_set: tuple[int, ...]
    residual: float

    def to_dict(self) -> dict:
        return {
            "actions": list(self.actions),
            "gifts": list(self.gifts),
            "aggregate_G": self.aggregate_G,
            "score": self.score,
            "active_set": list(self.active_set),
            "residual": self.residual,
        }


@dataclass(frozen=True)
class CriticalThresholds:
    """Free-riding geometry of one player in a disjunctive task.

    g_star / G_star: contribution and aggregate at the indifference point;
    G_minus_star: the opponents' provision above which the player's best
    response is zero; standalone: the outcome the player would produce alone.
    """

    g_star: float
    G_minus_star: float
    G_star: float
    standalone: float


@dataclass(frozen=True)
class NashCheck:
    """Result of the brute-force grid oracle."""

    is_nash: bool
    max_gain: float
    best_deviation: tuple[int, float] | None


# ---------------------------------------------------------------------------
# scalar root-finding / log-domain helpers
# ---------------------------------------------------------------------------

def _bisect(f, lo, hi, *, xtol, flo=None, fhi=None, maxiter=400):
    """Plain bisection; tolerant of +/-inf function values at the ends."""
    flo = f(lo) if flo is None else flo
    fhi = f(hi) if fhi is None else fhi
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo < 0) == (fhi < 0):
        raise InputError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= xtol:
            break
    return 0.5 * (lo + hi)


def _agg2(rho: float, w: float, v: float) -> float:
    """(w**rho + v**rho)**(1/rho) for w, v >= 0 with the zero conventions."""
    if w == 0.0 and v == 0.0:
        return 0.0
    if rho < 0 and (w == 0.0 or v == 0.0):
        return 0.0
    if w == 0.0:
        return v
    if v == 0.0:
        return w
    a = rho * math.log(w)
    b = rho * math.log(v)
    m = max(a, b)
    return math.exp((m + math.log(math.exp(a - m) + math.exp(b - m))) / rho)


def _require_smooth(game: GameSpec, where: str):
    if not game.evaluation.is_smooth:
        raise UnsupportedEvaluationError(
            f"{where} needs a smooth evaluation (logistic or identity); "
            "heaviside games can only be learned"
        )


# ---------------------------------------------------------------------------
# replacement maps
# ---------------------------------------------------------------------------

def replacement_additive(G: float, player: int, game: GameSpec) -> float:
    """Additive-task replacement: max(0, p*dt - (alpha/beta) * sigma/sigma')."""
    if game.rho != 1:
        raise WrongSolverError(
            f"additive replacement requires rho = 1, got rho = {game.rho}")
    _require_smooth(game, "replacement function")
    p = game.expertise[player]
    if p == 0.0:
        return 0.0
    cap = p * game.delta_t
    ratio = ratio_scalar(game.evaluation, G)
    r = cap - (game.alpha / game.betas[player]) * ratio
    return min(cap, max(0.0, r))


def _conjunctive_gift(ratio_G: float, G: float, p: float, beta: float,
                      alpha: float, delta_t: float, rho: float) -> float:
    """Root of the conjunctive first-order condition, compared in log space.

    Solves (dt - r/p) * (beta*p/alpha) * r**(rho-1) = ratio_G * G**(rho-1)
    for r in (0, p*dt].  The left side is strictly decreasing for rho < 1,
    from +inf at r -> 0+ down to 0 at r = p*dt.
    """
    cap = p * delta_t
    if G == 0.0 and rho < 0:
        return 0.0
    if ratio_G == 0.0 or (math.isinf(ratio_G) and ratio_G < 0):
        # zero opportunity cost: the FOC holds with strict inequality at the cap
        return cap
    log_rhs = math.log(ratio_G) + (rho - 1.0) * math.log(G)
    if math.isinf(log_rhs):
        return 0.0 if log_rhs > 0 else cap
    scale = math.log(beta * p / alpha)

    def f(r):
        return math.log(delta_t - r / p) + scale + (rho - 1.0) * math.log(r) - log_rhs

    lo = cap * 1e-300
    hi = cap * (1.0 - 1e-15)
    return _bisect(f, lo, hi, xtol=cap * 1e-14)


def standalone_value(player: int, game: GameSpec) -> float:
    """Outcome the player would produce as the sole contributor."""
    return _standalone_pair(player, game)[1]


def _standalone_pair(player: int, game: GameSpec) -> tuple[float, float]:
    """(gift, aggregate) of the single-contributor fixed point."""
    _require_smooth(game, "standalone value")
    p = game.expertise[player]
    if p == 0.0:
        return 0.0, 0.0
    cap = p * game.delta_t
    bscale = game.betas[player] ** (1.0 / game.rho)
    spec = game.evaluation

    def f(g):
        return cap - (game.alpha / bscale) * ratio_scalar(spec, bscale * g) - g

    if f(0.0) <= 0.0:
        return 0.0, 0.0
    g = _bisect(f, 0.0, cap, xtol=cap * 1e-14)
    return g, bscale * g


def replacement_conjunctive(G: float, player: int, game: GameSpec,
                            *, standalone: float | None = None) -> float:
    """Conjunctive-task replacement via the implicit first-order condition.

    Valid for G >= standalone when 0 < rho < 1 and for 0 <= G <= standalone
    when rho < 0; outside, the map is undefined and a RegimeError names the
    regime.
    """
    if not (game.rho < 1 and game.rho != 0):
        raise WrongSolverError(
            f"conjunctive replacement requires rho < 1 (rho != 0), got {game.rho}")
    _require_smooth(game, "replacement function")
    p = game.expertise[player]
    if p == 0.0:
        return 0.0
    G_bar = standalone_value(player, game) if standalone is None else standalone
    if 0 < game.rho < 1 and G < G_bar - BOUNDARY_TOL:
        raise RegimeError(
            f"for 0 < rho < 1 the replacement map of player {player} is defined "
            f"only for G >= standalone ({G_bar:.6g}); got G = {G:.6g}")
    if game.rho < 0 and G > G_bar + BOUNDARY_TOL:
        raise RegimeError(
            f"for rho < 0 the replacement map of player {player} is defined "
            f"only for G <= standalone ({G_bar:.6g}); got G = {G:.6g}")
    if G < 0:
        raise RegimeError(f"aggregate must be >= 0, got {G}")
    ratio = ratio_scalar(game.evaluation, G)
    return _conjunctive_gift(ratio, G, p, game.betas[player],
                             game.alpha, game.delta_t, game.rho)


def strongly_conjunctive_limit(game: GameSpec) -> float:
    """Equilibrium aggregate in the weakest-link limit for identical players.

    Root of G + n*alpha*sigma(G)/sigma'(G) - p*dt = 0.  With full expertise
    this is the textbook symmetric expression; the common factor p keeps it
    consistent with the rho = -500 solver for weaker symmetric teams.
    """
    _require_smooth(game, "strongly conjunctive limit")
    p = game.expertise[0]
    if any(q != p for q in game.expertise) or any(b != game.betas[0] for b in game.betas):
        raise RegimeError(
            "the weakest-link closed form assumes identical players "
            "(equal expertise and equal weights)")
    cap = p * game.delta_t
    if cap == 0.0:
        return 0.0
    spec = game.evaluation

    def f(G):
        return cap - game.n * game.alpha * ratio_scalar(spec, G) - G

    if f(0.0) <= 0.0:
        return 0.0
    return _bisect(f, 0.0, cap, xtol=cap * 1e-14)


# ---------------------------------------------------------------------------
# concave solver (rho <= 1)
# ---------------------------------------------------------------------------

def _result_from_gifts(game: GameSpec, gifts: np.ndarray, reference_G: float) -> EquilibriumResult:
    gifts = np.maximum(np.asarray(gifts, dtype=float), 0.0)
    caps = game.full_time_gifts()
    actions = np.where(caps > 0, np.clip(gifts / np.where(caps > 0, caps, 1.0), 0.0, 1.0), 0.0)
    aggregate = ces_aggregate(gifts, game.rho, game.betas)
    score = float(eval_score(game.evaluation, aggregate))
    active = tuple(int(i) for i in np.nonzero(gifts > BOUNDARY_TOL)[0])
    residual = abs(aggregate - reference_G)
    return EquilibriumResult(
        actions=tuple(float(a) for a in actions),
        gifts=tuple(float(g) for g in gifts),
        aggregate_G=float(aggregate),
        score=score,
        active_set=active,
        residual=float(residual),
    )


def solve_equilibrium_concave(game: GameSpec, *, num_brackets: int = 2048) -> list[EquilibriumResult]:
    """All fixed points of the aggregate replacement map for rho <= 1.

    Scans ``num_brackets`` uniform brackets for sign changes of R(G) - G and
    refines each by bisection; raises NoEquilibriumError (with the scan
    trace attached) when no crossing exists.
    """
    if game.rho > 1 or game.rho == 0:
        raise WrongSolverError(
            f"concave solver requires rho <= 1 (rho != 0), got {game.rho}; "
            "use the disjunctive enumerator for rho > 1")
    _require_smooth(game, "equilibrium solver")

    standalones = [_standalone_pair(i, game)[1] for i in range(game.n)]
    G_max = game.max_aggregate()
    if game.rho == 1:
        lo, hi = 0.0, G_max
        def gift(i, G):
            return replacement_additive(G, i, game)
    elif game.rho > 0:
        lo, hi = max(standalones), G_max
        def gift(i, G):
            return replacement_conjunctive(G, i, game, standalone=standalones[i])
    else:
        # G = 0 is a trivial fixed point of the weakest-link limit (any zero
        # gift forces G = 0); the replacement theory covers only G > 0.
        hi = min(standalones)
        lo = hi * 1e-9
        def gift(i, G):
            return replacement_conjunctive(G, i, game, standalone=standalones[i])

    if not hi > lo:
        raise NoEquilibriumError(
            f"empty scan interval [{lo:.6g}, {hi:.6g}]: some player has a "
            "degenerate standalone value", scan=[])

    def f(G):
        gifts = [gift(i, G) for i in range(game.n)]
        return ces_aggregate(gifts, game.rho, game.betas) - G

    grid = np.linspace(lo, hi, num_brackets + 1)
    values = [f(G) for G in grid]

    roots: list[float] = []
    if game.rho == 1 and abs(values[0]) < 1e-12:
        roots.append(grid[0])  # nobody contributes even at G = 0
    for a, b, fa, fb in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if fa == 0.0 and a not in roots:
            roots.append(float(a))
        elif (fa < 0) != (fb < 0):
            roots.append(float(_bisect(f, float(a), float(b), xtol=max(hi, 1.0) * 1e-13,
                                       flo=fa, fhi=fb)))
    if abs(values[-1]) < 1e-12 and not any(abs(r - grid[-1]) < 1e-9 for r in roots):
        roots.append(float(grid[-1]))

    deduped: list[float] = []
    for r in sorted(roots):
        if not deduped or r - deduped[-1] > max(hi, 1.0) * 1e-9:
            deduped.append(r)

    if not deduped:
        step = max(1, num_brackets // 64)
        trace = [(float(G), float(v)) for G, v in zip(grid[::step], values[::step])]
        raise NoEquilibriumError(
            f"no fixed point of the aggregate replacement map on [{lo:.6g}, {hi:.6g}]",
            scan=trace)

    results = []
    for G_hat in deduped:
        gifts = np.array([gift(i, G_hat) for i in range(game.n)])
        results.append(_result_from_gifts(game, gifts, G_hat))
    return results


# ---------------------------------------------------------------------------
# disjunctive machinery (rho > 1)
# ---------------------------------------------------------------------------

def _u_zero(game: GameSpec, G_minus: float) -> float:
    return game.delta_t ** game.alpha * score_scalar(game.evaluation, G_minus)


def _best_positive_response(game: GameSpec, player: int, G_minus: float,
                            *, grid: int = 256) -> tuple[float, float] | None:
    """Best strictly positive contribution against opponents providing G_minus.

    Returns (gift, utility) for the best g > 0, or None when every positive
    contribution is dominated so badly that the sampled utilities vanish.
    Uses a coarse grid followed by ternary refinement.
    """
    p = game.expertise[player]
    if p == 0.0:
        return None
    cap = p * game.delta_t
    bscale = game.betas[player] ** (1.0 / game.rho)
    spec = game.evaluation
    alpha = game.alpha
    dt = game.delta_t

    def u(g):
        G = _agg2(game.rho, bscale * g, G_minus)
        return (dt - g / p) ** alpha * score_scalar(spec, G)

    gs = np.linspace(0.0, cap, grid + 1)[1:]
    us = [u(g) for g in gs]
    j = int(np.argmax(us))
    lo = gs[j - 1] if j > 0 else cap * 1e-12
    hi = gs[j + 1] if j + 1 < len(gs) else gs[-1]
    for _ in range(200):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if u(m1) < u(m2):
            lo = m1
        else:
            hi = m2
        if hi - lo <= cap * 1e-14:
            break
    g_best = 0.5 * (lo + hi)
    return g_best, u(g_best)


def critical_thresholds(player: int, game: GameSpec) -> CriticalThresholds:
    """Indifference point between contributing and free-riding (rho > 1).

    Solved with the opponents' provision as the outer bisection variable:
    at G_minus_star the best positive response and free-riding pay the same.
    (Parametrising by the gift instead collapses numerically for large rho,
    where the gift gap to the standalone point falls below float spacing.)
    """
    if game.rho <= 1:
        raise WrongSolverError(
            f"critical thresholds exist only for disjunctive tasks (rho > 1), "
            f"got rho = {game.rho}")
    _require_smooth(game, "critical thresholds")
    g_bar, G_bar = _standalone_pair(player, game)
    if g_bar <= BOUNDARY_TOL:
        raise RegimeError(
            f"player {player} never contributes even alone; the contribution "
            "thresholds are undefined")

    p = game.expertise[player]
    bscale = game.betas[player] ** (1.0 / game.rho)
    # single-valuedness of the positive replacement branch:
    # rho/(dt*p) >= sigma'(G_bar)/sigma(G_bar) * beta**(1/rho)/alpha
    bound = bscale / (game.alpha * ratio_scalar(game.evaluation, G_bar))
    if game.rho / (game.delta_t * p) + 1e-12 < bound:
        raise RegimeError(
            "the positive replacement branch is not single-valued here: "
            f"rho/(dt*p) = {game.rho / (game.delta_t * p):.6g} < "
            f"sigma'/sigma(standalone) * beta**(1/rho)/alpha = {bound:.6g}")

    def h(G_minus):
        best = _best_positive_response(game, player, G_minus)
        if best is None:
            return -math.inf
        return best[1] - _u_zero(game, G_minus)

    h0 = h(0.0)
    if h0 <= 0.0:
        raise RegimeError(
            f"player {player} prefers free-riding even on nothing; no "
            "positive threshold exists")
    G_minus_star = _bisect(h, 0.0, G_bar, xtol=max(G_bar, 1.0) * 1e-13, flo=h0)
    best = _best_positive_response(game, player, G_minus_star)
    # The indifference point sits weakly left of the standalone point; the
    # argmax location carries ~sqrt(eps) ternary noise, so enforce the exact
    # ordering rather than letting it leak into subset-acceptance checks.
    g_star = min(best[0], g_bar)
    G_star = min(_agg2(game.rho, bscale * g_star, G_minus_star), G_bar)

    u_active = best[1]
    u_out = _u_zero(game, G_minus_star)
    scale = max(abs(u_active), abs(u_out), 1e-300)
    if abs(u_active - u_out) > 1e-5 * scale:
        raise RegimeError(
            f"indifference verification failed for player {player}: "
            f"{u_active!r} vs {u_out!r}")
    return CriticalThresholds(
        g_star=float(g_star),
        G_minus_star=float(G_minus_star),
        G_star=float(G_star),
        standalone=float(G_bar),
    )


def _positive_branch_gift(game: GameSpec, player: int, G: float) -> float:
    """Positive replacement branch: the local-maximum gift at aggregate G.

    Solves (dt - g/p) * (beta*p/alpha) * g**(rho-1) = sigma/sigma' * G**(rho-1)
    on the rising part g in (0, p*dt*(1 - 1/rho)], where the left side is
    strictly increasing for rho > 1.
    """
    p = game.expertise[player]
    cap = p * game.delta_t
    rho = game.rho
    peak = cap * (1.0 - 1.0 / rho)
    ratio = ratio_scalar(game.evaluation, G)
    log_rhs = math.log(ratio) + (rho - 1.0) * math.log(G)
    scale = math.log(game.betas[player] * p / game.alpha)

    def f(g):
        return math.log(game.delta_t - g / p) + scale + (rho - 1.0) * math.log(g) - log_rhs

    f_peak = f(peak)
    if f_peak < 0:
        # G sits above the bell of the local-max curve; allow a whisker of
        # slack for aggregates at the very top of the branch domain.
        if f_peak > -1e-9:
            return peak
        raise RegimeError(
            f"no positive replacement branch at G = {G:.6g} for player {player}")
    return _bisect(f, peak * 1e-300, peak, xtol=cap * 1e-15, fhi=f_peak)


def _share_positive(game: GameSpec, player: int, G: float) -> float:
    r = _positive_branch_gift(game, player, G)
    if r <= 0.0 or G <= 0.0:
        return 0.0
    return math.exp(math.log(game.betas[player]) + game.rho * (math.log(r) - math.log(G)))


def share_function(player: int, G: float, game: GameSpec, branch: str = "positive") -> float:
    """Share map s_i(G): the fraction beta_i * r_i(G)**rho / G**rho.

    ``branch`` selects the component: "positive" is defined on
    [G_star, standalone] and strictly increasing with s(standalone) = 1;
    "zero" is defined for G >= G_minus_star and returns 0.
    """
    if game.rho <= 1:
        raise WrongSolverError(
            f"share functions are used for disjunctive tasks (rho > 1), got {game.rho}")
    _require_smooth(game, "share function")
    if branch not in ("positive", "zero"):
        raise InputError(f"branch must be 'positive' or 'zero', got {branch!r}")
    g_bar, G_bar = _standalone_pair(player, game)
    if g_bar <= BOUNDARY_TOL:
        if branch == "zero":
            return 0.0
        raise RegimeError(f"player {player} has no positive branch (degenerate standalone)")
    thr = critical_thresholds(player, game)
    if branch == "zero":
        if G < thr.G_minus_star - BOUNDARY_TOL:
            raise RegimeError(
                f"zero branch undefined below G_minus_star = {thr.G_minus_star:.6g}; "
                f"got G = {G:.6g}")
        return 0.0
    if not (thr.G_star - BOUNDARY_TOL <= G <= thr.standalone + BOUNDARY_TOL):
        raise RegimeError(
            f"positive branch domain is [{thr.G_star:.6g}, {thr.standalone:.6g}]; "
            f"got G = {G:.6g}")
    return _share_positive(game, player, min(G, G_bar))


def enumerate_disjunctive_equilibria(game: GameSpec, *, subset_cap: int = 10) -> list[EquilibriumResult]:
    """All equilibria of a disjunctive task, one per admissible active set.

    A candidate active set J is accepted when the critical level
    G*(J) = max(max_{j in J} G_star_j, max_{i not in J} G_minus_star_i)
    does not exceed the smallest standalone value in J and the active shares
    at G*(J) sum to at most one; its equilibrium aggregate then solves
    sum_{j in J} s_j(G) = 1.
    """
    if game.rho <= 1:
        raise WrongSolverError(
            f"disjunctive enumeration requires rho > 1, got {game.rho}")
    _require_smooth(game, "equilibrium solver")
    if game.n > subset_cap:
        raise ConfigurationError(
            f"enumeration over {game.n} players needs 2**{game.n} - 1 subsets, "
            f"above the configured cap of {subset_cap}; raise subset_cap "
            "explicitly to proceed")

    pairs = [_standalone_pair(i, game) for i in range(game.n)]
    capable = [i for i in range(game.n) if pairs[i][0] > BOUNDARY_TOL]
    thresholds: dict[int, CriticalThresholds] = {
        i: critical_thresholds(i, game) for i in capable}

    results: list[EquilibriumResult] = []
    for size in range(1, len(capable) + 1):
        for J in itertools.combinations(capable, size):
            inactive = [i for i in range(game.n) if i not in J]
            g_star_level = max(thresholds[j].G_star for j in J)
            out_level = max(
                (thresholds[i].G_minus_star for i in inactive if i in thresholds),
                default=0.0)
            G_star_J = max(g_star_level, out_level)
            hi = min(thresholds[j].standalone for j in J)
            if G_star_J > hi + BOUNDARY_TOL:
                continue
            G_star_J = min(G_star_J, hi)

            def S(G, _J=J):
                return sum(_share_positive(game, j, G) for j in _J)

            s_lo = S(G_star_J)
            if s_lo > 1.0 + 1e-9:
                continue
            if abs(s_lo - 1.0) <= 1e-12:
                G_hat = G_star_J
            else:
                s_hi = S(hi)
                if s_hi < 1.0 - 1e-9:
                    continue
                if abs(s_hi - 1.0) <= 1e-12:
                    G_hat = hi
                else:
                    G_hat = _bisect(lambda G: S(G) - 1.0, G_star_J, hi,
                                    xtol=max(hi, 1.0) * 1e-14,
                                    flo=s_lo - 1.0, fhi=s_hi - 1.0)
            gifts = np.zeros(game.n)
            for j in J:
                gifts[j] = _positive_branch_gift(game, j, G_hat)
            result = _result_from_gifts(game, gifts, G_hat)
            residual = abs(S(G_hat) - 1.0)
            results.append(EquilibriumResult(
                actions=result.actions, gifts=result.gifts,
                aggregate_G=result.aggregate_G, score=result.score,
                active_set=result.active_set, residual=float(residual)))
    return results


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

def max_achievable_utility(game: GameSpec) -> float:
    """Loose per-player utility bound used to scale epsilon in Nash checks."""
    best_leisure = game.delta_t * max(game.leisure_capacity)
    top_score = float(eval_score(game.evaluation, game.max_aggregate()))
    return best_leisure ** game.alpha * top_score


def _deviation_utilities(game: GameSpec, gifts: np.ndarray, player: int,
                         candidate_actions: np.ndarray) -> np.ndarray:
    cap = game.expertise[player] * game.delta_t
    cand_gifts = candidate_actions * cap
    arrays = [cand_gifts if j == player else np.asarray(float(gifts[j]))
              for j in range(game.n)]
    G = ces_aggregate_grid(arrays, game.rho, game.betas)
    scores = eval_score(game.evaluation, G)
    leisure = (1.0 - candidate_actions) * game.leisure_capacity[player] * game.delta_t
    return leisure ** game.alpha * scores


def verify_epsilon_nash(actions, game: GameSpec, epsilon: float,
                        grid_step: float = 0.01,
                        refine_step: float | None = None) -> NashCheck:
    """Brute-force check of the equilibrium condition on an action grid.

    For each player, holding the others fixed, evaluates the utility of
    every grid action and reports the largest unilateral improvement; the
    profile is an epsilon-Nash point when that gain is at most epsilon.
    Works for any evaluation, including heaviside.
    """
    if isinstance(actions, JointAction):
        arr = actions.as_array()
    else:
        arr = np.asarray(actions, dtype=float)
    k = round(1.0 / grid_step)
    if abs(k * grid_step - 1.0) > 1e-9:
        raise InputError(f"grid_step must divide 1 evenly, got {grid_step}")
    gifts = gifts_from_actions(game, arr)
    base_G = ces_aggregate(gifts, game.rho, game.betas)
    base_score = eval_score(game.evaluation, base_G)
    leisure = (1.0 - arr) * np.asarray(game.leisure_capacity) * game.delta_t
    base_u = leisure ** game.alpha * base_score

    max_gain = -math.inf
    best = None
    grid_actions = np.linspace(0.0, 1.0, k + 1)
    for i in range(game.n):
        us = _deviation_utilities(game, gifts, i, grid_actions)
        j = int(np.argmax(us))
        best_a, best_u = float(grid_actions[j]), float(us[j])
        if refine_step is not None:
            lo = max(0.0, best_a - grid_step)
            hi = min(1.0, best_a + grid_step)
            m = int(round((hi - lo) / refine_step))
            fine = lo + refine_step * np.arange(m + 1)
            fine = fine[fine <= 1.0 + 1e-12]
            us_f = _deviation_utilities(game, gifts, i, np.clip(fine, 0.0, 1.0))
            jf = int(np.argmax(us_f))
            if us_f[jf] > best_u:
                best_a, best_u = float(fine[jf]), float(us_f[jf])
        gain = best_u - float(base_u[i])
        if gain > max_gain:
            max_gain = gain
            best = (i, best_a)
    return NashCheck(is_nash=bool(max_gain <= epsilon), max_gain=float(max_gain),
                     best_deviation=best)
