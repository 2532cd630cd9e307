"""Best Fit on items of size 1/4 (probability p) and 1/3 (probability q = 1 - p).

With only these two sizes a bin of load above 3/4 can take nothing more,
and Best Fit keeps at most two open bins. The open-bin loads therefore form
a nine-state Markov chain whose transitions are derived here by running the
Best Fit rule, not typed in.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .engine import quarter_third_distribution, sample_iid
from .packing import ONE, DomainError, as_size

QUARTER = Fraction(1, 4)
THIRD = Fraction(1, 3)
CLOSED_ABOVE = Fraction(3, 4)

STATES = "ABCDEFGHI"
STATE_LOADS: dict[str, tuple[Fraction, ...]] = {
    "A": (),
    "B": (Fraction(1, 4),),
    "C": (Fraction(1, 3),),
    "D": (Fraction(1, 2),),
    "E": (Fraction(7, 12),),
    "F": (Fraction(2, 3),),
    "G": (Fraction(3, 4),),
    "H": (Fraction(1, 3), Fraction(3, 4)),
    "I": (Fraction(2, 3), Fraction(3, 4)),
}
_LABEL_OF = {loads: label for label, loads in STATE_LOADS.items()}

# Transition diagram as drawn: (from, to, arrival, opens a bin). Arrival "p"
# is the 1/4 item, "q" the 1/3 item, "1" means both.
EXPECTED_TRANSITIONS = (
    ("A", "B", "p", True),
    ("A", "C", "q", True),
    ("B", "D", "p", False),
    ("B", "E", "q", False),
    ("C", "E", "p", False),
    ("C", "F", "q", False),
    ("D", "G", "p", False),
    ("D", "A", "q", False),
    ("E", "A", "1", False),
    ("F", "A", "1", False),
    ("G", "A", "p", False),
    ("G", "H", "q", True),
    ("H", "C", "p", False),
    ("H", "I", "q", False),
    ("I", "F", "p", False),
    ("I", "G", "q", False),
)


class StateClosureError(AssertionError):
    """Best Fit reached an open-bin configuration outside the nine states."""


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    probability: Fraction
    opens_bin: bool
    arrival: str


@dataclass(frozen=True)
class MarkovModel:
    p: Fraction
    transitions: tuple[Transition, ...]

    @property
    def q(self) -> Fraction:
        return 1 - self.p

    def matrix(self) -> list[list[Fraction]]:
        P = [[Fraction(0)] * 9 for _ in range(9)]
        for t in self.transitions:
            P[STATES.index(t.source)][STATES.index(t.target)] += t.probability
        return P

    def float_matrix(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.matrix()])


def _check_p(p, allow_limit: bool = False) -> Fraction:
    p = as_size(p)
    lo_ok = p > 0
    hi_ok = p <= 1 if allow_limit else p < 1
    if not (lo_ok and hi_ok):
        raise DomainError(f"p must lie in (0, 1), got {p}")
    return p


def best_fit_open_bins(loads: tuple[Fraction, ...], item: Fraction) -> tuple[tuple[Fraction, ...], bool]:
    """Place ``item`` by Best Fit among ``loads`` and drop bins above 3/4."""
    feasible = [i for i, load in enumerate(loads) if load + item <= ONE]
    new = list(loads)
    if feasible:
        target = max(feasible, key=lambda i: new[i])
        new[target] += item
        opened = False
    else:
        new.append(item)
        opened = True
    return tuple(sorted(x for x in new if x <= CLOSED_ABOVE)), opened


def state_of(loads) -> str:
    key = tuple(sorted(loads))
    if key not in _LABEL_OF:
        raise StateClosureError(f"open-bin loads {key} are not a chain state")
    return _LABEL_OF[key]


def build_chain(p) -> MarkovModel:
    p = _check_p(p)
    q = 1 - p
    transitions = []
    for source in STATES:
        moves: dict[str, list] = {}
        for arrival, item, prob in (("p", QUARTER, p), ("q", THIRD, q)):
            loads, opened = best_fit_open_bins(STATE_LOADS[source], item)
            target = state_of(loads)
            entry = moves.setdefault(target, [Fraction(0), opened, []])
            if entry[1] != opened:
                raise StateClosureError(f"{source}->{target} both opens and does not open a bin")
            entry[0] += prob
            entry[2].append(arrival)
        for target, (prob, opened, arrivals) in moves.items():
            label = "1" if len(arrivals) == 2 else arrivals[0]
            transitions.append(Transition(source, target, prob, opened, label))
    model = MarkovModel(p, tuple(transitions))
    for source in STATES:
        out = sum((t.probability for t in model.transitions if t.source == source), Fraction(0))
        assert out == 1, (source, out)
    return model


def transition_signature(model: MarkovModel) -> set[tuple[str, str, str, bool]]:
    return {(t.source, t.target, t.arrival, t.opens_bin) for t in model.transitions}


def matches_expected(model: MarkovModel) -> bool:
    if transition_signature(model) != set(EXPECTED_TRANSITIONS):
        return False
    p, q = model.p, model.q
    weight = {"p": p, "q": q, "1": Fraction(1)}
    expected = {(s, t): weight[a] for s, t, a, _ in EXPECTED_TRANSITIONS}
    return all(expected[(t.source, t.target)] == t.probability for t in model.transitions)


@dataclass(frozen=True)
class StationaryVector:
    omega: dict[str, Fraction | float]
    exact: bool
    theta: Fraction | None = None
    lam: Fraction | None = None

    def __getitem__(self, state: str):
        return self.omega[state]

    def as_list(self) -> list:
        return [self.omega[s] for s in STATES]


def theta_lambda(p) -> tuple[Fraction, Fraction]:
    q = 1 - p
    theta = p**3 / (1 - q**3)
    lam = theta * q * (3 - q**2) + theta + 3
    return theta, lam


def balance_equations(omega: StationaryVector | dict, p) -> list[bool]:
    """Check the ten stationarity equations (one per state plus normalization)."""
    w = omega.omega if isinstance(omega, StationaryVector) else omega
    q = 1 - p
    A, B, C, D, E, F, G, H, I = (w[s] for s in STATES)
    return [
        A == E + F + p * G + q * D,
        B == p * A,
        C == q * A + p * H,
        D == p * B,
        E == q * B + p * C,
        F == q * C + p * I,
        G == p * D + q * I,
        H == q * G,
        I == q * H,
        A + B + C + D + E + F + G + H + I == 1,
    ]


def stationary_closed_form(p, allow_limit: bool = False) -> StationaryVector:
    """Exact stationary distribution.

    ``allow_limit`` admits p = 1, where the chain degenerates to the cycle
    A, B, D, G.
    """
    p = _check_p(p, allow_limit)
    q = 1 - p
    theta, lam = theta_lambda(p)
    raw = (
        Fraction(1),
        p,
        q + p * q * theta,
        p**2,
        2 * p * q + p**2 * q * theta,
        q**2 + 2 * p * q**2 * theta,
        theta,
        q * theta,
        q**2 * theta,
    )
    vec = StationaryVector({s: x / lam for s, x in zip(STATES, raw)}, True, theta, lam)
    if not all(balance_equations(vec, p)):
        raise ArithmeticError(f"closed form fails the balance equations at p = {p}")
    if p < 1:
        P = build_chain(p).matrix()
        w = vec.as_list()
        for j in range(9):
            assert sum(w[i] * P[i][j] for i in range(9)) == w[j]
    return vec


def stationary_numeric(model: MarkovModel) -> StationaryVector:
    """Solve omega P = omega, sum(omega) = 1 in floating point."""
    P = model.float_matrix()
    A = P.T - np.eye(9)
    A[-1, :] = 1.0
    b = np.zeros(9)
    b[-1] = 1.0
    if abs(np.linalg.det(A)) < 1e-14:
        raise np.linalg.LinAlgError("balance system is singular")
    w = np.linalg.solve(A, b)
    return StationaryVector({s: float(x) for s, x in zip(STATES, w)}, False)


def bf_rate(p) -> Fraction:
    """Bins Best Fit opens per item in the long run: omega_A + q omega_G."""
    p = _check_p(p)
    w = stationary_closed_form(p)
    return w["A"] + (1 - p) * w["G"]


def opt_rate_upper(p) -> Fraction:
    """Per-item upper bound on OPT: p/4 + q/3 = 1/3 - p/12."""
    p = as_size(p)
    if not 0 <= p <= 1:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    return THIRD - p / 12


def iid_ratio_lower_bound(p) -> Fraction:
    return bf_rate(p) / opt_rate_upper(p)


def sweep(lo=Fraction(1, 100), hi=Fraction(99, 100), step=Fraction(1, 100)) -> list[tuple[Fraction, Fraction]]:
    lo, hi, step = as_size(lo), as_size(hi), as_size(step)
    rows = []
    p = lo
    while p <= hi:
        rows.append((p, iid_ratio_lower_bound(p)))
        p += step
    return rows


@dataclass
class CrosscheckReport:
    p: Fraction
    n: int
    seed: int
    visits: dict[str, int]
    frequencies: dict[str, float]
    max_deviation: float
    bins_opened: int
    departures_from_a: int
    g_to_h: int
    bins_per_item: float
    predicted_rate: float
    rate_error: float
    checks: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "p": f"{self.p.numerator}/{self.p.denominator}",
            "n": self.n,
            "seed": self.seed,
            "visits": self.visits,
            "frequencies": self.frequencies,
            "max_deviation": self.max_deviation,
            "bins_opened": self.bins_opened,
            "departures_from_A": self.departures_from_a,
            "G_to_H": self.g_to_h,
            "bins_per_item": self.bins_per_item,
            "predicted_rate": self.predicted_rate,
            "rate_relative_error": self.rate_error,
            "checks": self.checks,
            "passed": self.passed,
        }


def simulate_and_crosscheck(
    p, n: int, seed: int = 0, freq_tol: float = 5e-3, rate_tol: float = 0.01
) -> CrosscheckReport:
    """Run Best Fit on n i.i.d. items and compare its trajectory with the chain.

    Loads are tracked in twelfths. Before every arrival the open bins must
    form one of the nine states; afterwards the visit frequencies are
    compared with the stationary vector and the number of opened bins with
    the number of departures from A plus G -> H moves.
    """
    p = _check_p(p)
    if n < 1:
        raise DomainError("n must be at least 1")
    items = sample_iid(quarter_third_distribution(p), n, seed)
    twelfths = {QUARTER: 3, THIRD: 4}
    label_of = {tuple(int(x * 12) for x in loads): s for s, loads in STATE_LOADS.items()}
    visits: Counter = Counter()
    moves: Counter = Counter()
    open_loads: list[int] = []
    opened = 0
    state = "A"
    for item in items:
        x = twelfths[item]
        visits[state] += 1
        feasible = [i for i, load in enumerate(open_loads) if load + x <= 12]
        if feasible:
            target = max(feasible, key=open_loads.__getitem__)
            open_loads[target] += x
        else:
            open_loads.append(x)
            opened += 1
        open_loads = [load for load in open_loads if load <= 9]
        nxt = label_of.get(tuple(sorted(open_loads)))
        if nxt is None:
            raise StateClosureError(f"open-bin loads {sorted(open_loads)}/12 are not a chain state")
        moves[(state, nxt)] += 1
        state = nxt
    departures_a = sum(c for (src, _), c in moves.items() if src == "A")
    g_to_h = moves[("G", "H")]
    omega = stationary_closed_form(p)
    freqs = {s: visits[s] / n for s in STATES}
    deviation = max(abs(freqs[s] - float(omega[s])) for s in STATES)
    rate = opened / n
    predicted = float(omega["A"] + (1 - p) * omega["G"])
    rate_error = abs(rate - predicted) / predicted
    checks = {
        "states_closed": True,
        "frequencies_within_tolerance": deviation < freq_tol,
        "opened_equals_A_departures_plus_G_to_H": opened == departures_a + g_to_h,
        "bins_per_item_within_tolerance": rate_error <= rate_tol,
    }
    return CrosscheckReport(
        p=p,
        n=n,
        seed=seed,
        visits=dict(visits),
        frequencies=freqs,
        max_deviation=deviation,
        bins_opened=opened,
        departures_from_a=departures_a,
        g_to_h=g_to_h,
        bins_per_item=rate,
        predicted_rate=predicted,
        rate_error=rate_error,
        checks=checks,
    )
