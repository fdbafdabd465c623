"""Monte Carlo estimates against the invariant measure ``sin(phi) dphi ds``.

Samples are generated in fixed-size chunks, each from its own Philox stream
keyed by ``(seed, chunk index)``, so a sample's value depends only on the
seed and its index.  Chunks can be mapped on a process pool; the results are
concatenated in chunk order, which makes every estimate independent of the
worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .billiard import OK, PhasePoint, map_power, phase_distance, step
from .boundary import BoundaryCurve
from .errors import DomainError

CHUNK = 8192
SAMPLERS = ("mu", "uniform")

# the map is accurate to ~1e-12; paired differences below this are roundoff
RESOLUTION = 1e-12


@dataclass
class PhaseSamples:
    """Column-oriented batch of phase points."""

    s: np.ndarray
    phi: np.ndarray
    seed: int | None = None

    def __len__(self):
        return self.s.size

    def __getitem__(self, i) -> PhasePoint:
        return PhasePoint(float(self.s[i]), float(self.phi[i]))

    def to_points(self) -> list[PhasePoint]:
        return [self[i] for i in range(len(self))]


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), chunk])))


def _sample_chunk(total_length, seed, chunk, size, sampler):
    # row-major (size, 2) so a prefix of a chunk does not depend on its size
    u = _chunk_rng(seed, chunk).random((size, 2)).T
    s = u[0] * total_length
    if sampler == "mu":
        # inverse CDF of the density sin(phi) / 2 on (0, pi)
        phi = np.arccos(1.0 - 2.0 * u[1])
    else:
        phi = math.pi * u[1]
    return s, phi


def sample_mu(b: BoundaryCurve, n: int, seed: int, sampler: str = "mu") -> PhaseSamples:
    """Draw ``n`` phase points, ``s`` uniform and ``phi`` with density ``sin(phi)/2``.

    ``sampler="uniform"`` draws ``phi`` uniformly instead; it is the wrong
    measure and exists as a negative control for :func:`invariance_test`.
    """
    if n < 1:
        raise DomainError("need at least one sample")
    if sampler not in SAMPLERS:
        raise DomainError(f"unknown sampler {sampler!r}")
    parts = [
        _sample_chunk(b.total_length, seed, c, min(CHUNK, n - c * CHUNK), sampler)
        for c in range(-(-n // CHUNK))
    ]
    s = np.concatenate([p[0] for p in parts])
    phi = np.concatenate([p[1] for p in parts])
    # phi = 0 has probability ~1e-16 but is outside the phase space
    phi = np.clip(phi, 1e-300, math.pi - 1e-16)
    return PhaseSamples(s, phi, seed)


def _return_chunk(args):
    b, s, phi, period = args
    s1, phi1, _, status = map_power(b, s, phi, period)
    d = phase_distance(b.total_length, s, phi, s1, phi1)
    return np.where(status == OK, d, np.nan), status


def return_distances(b: BoundaryCurve, samples: PhaseSamples, period: int = 3,
                     workers: int = 1):
    """Phase distance from each sample to its image under ``T**period``.

    Returns ``(distances, status)``; samples whose orbit hit a corner, grazed
    or missed the boundary get NaN and a nonzero status.
    """
    jobs = [(b, samples.s[i:i + CHUNK], samples.phi[i:i + CHUNK], period)
            for i in range(0, len(samples), CHUNK)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_return_chunk, jobs))
    else:
        results = [_return_chunk(j) for j in jobs]
    return (np.concatenate([r[0] for r in results]),
            np.concatenate([r[1] for r in results]))


@dataclass
class FractionEstimate:
    eps: float
    fraction: float
    stderr: float
    hits: int
    n_effective: int
    n_excluded: int


def _estimate(d, eps) -> FractionEstimate:
    valid = ~np.isnan(d)
    n_eff = int(valid.sum())
    hits = int((d[valid] < eps).sum())
    f = hits / n_eff if n_eff else float("nan")
    se = math.sqrt(f * (1 - f) / n_eff) if n_eff else float("nan")
    return FractionEstimate(float(eps), f, se, hits, n_eff, int(d.size - n_eff))


def periodic_fraction(b: BoundaryCurve, samples: PhaseSamples, eps: float,
                      period: int = 3, workers: int = 1) -> FractionEstimate:
    """Fraction of samples returning within ``eps`` of themselves after ``period`` bounces.

    Corner, grazing and missed-boundary samples are excluded from the
    denominator and counted in ``n_excluded``.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    d, _ = return_distances(b, samples, period, workers)
    return _estimate(d, eps)


@dataclass
class MeasureScan:
    table: dict
    tolerances: list
    fractions: list
    stderrs: list
    hits: list
    n: int
    n_effective: int
    n_excluded: int
    seed: int
    period: int = 3
    config: dict = field(default_factory=dict)

    def ratios(self, min_hits: int = 100):
        """``fraction(eps_k) / fraction(eps_{k+1})`` for pairs with enough hits on both sides."""
        out = []
        for k in range(len(self.tolerances) - 1):
            h0, h1 = self.hits[k], self.hits[k + 1]
            if h0 >= min_hits and h1 >= min_hits:
                out.append((k, self.fractions[k] / self.fractions[k + 1]))
        return out

    def rows(self):
        for k, eps in enumerate(self.tolerances):
            yield {
                "eps": eps,
                "fraction": self.fractions[k],
                "stderr": self.stderrs[k],
                "n_effective": self.n_effective,
                "n_excluded": self.n_excluded,
            }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# config: " + json.dumps(self.config or self._header(), sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        cols = ["eps", "fraction", "stderr", "n_effective", "n_excluded"]
        writer.writerow(cols)
        for row in self.rows():
            writer.writerow([_fmt(row[c]) for c in cols])
        return buf.getvalue()

    def to_json(self) -> str:
        d = asdict(self)
        d["config"] = self.config or self._header()
        return json.dumps(d, indent=2, sort_keys=True)

    def _header(self):
        return {"table": self.table, "n": self.n, "seed": self.seed, "period": self.period}


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return format(x, ".17g") if math.isfinite(x) else "nan"


def scaling_study(b: BoundaryCurve, n: int, eps0: float, halvings: int, seed: int,
                  period: int = 3, workers: int = 1) -> MeasureScan:
    """Near-periodic fractions at ``eps0 * 2**-k`` for ``k = 0..halvings``.

    One sample set is shared by all tolerances, so the fractions are
    non-increasing in ``k``.
    """
    if halvings < 3:
        raise DomainError("need at least 3 halvings")
    samples = sample_mu(b, n, seed)
    d, _ = return_distances(b, samples, period, workers)
    ests = [_estimate(d, eps0 * 2.0**-k) for k in range(halvings + 1)]
    return MeasureScan(
        table=dict(b.descriptor),
        tolerances=[e.eps for e in ests],
        fractions=[e.fraction for e in ests],
        stderrs=[e.stderr for e in ests],
        hits=[e.hits for e in ests],
        n=n,
        n_effective=ests[0].n_effective,
        n_excluded=ests[0].n_excluded,
        seed=seed,
        period=period,
    )


@dataclass
class InvarianceReport:
    passed: bool
    rows: list
    n_effective: int
    n_excluded: int
    sampler: str

    def summary(self) -> str:
        lines = [f"sampler={self.sampler} n={self.n_effective} passed={self.passed}"]
        for r in self.rows:
            lines.append(f"  {r['name']:<12} diff={r['diff']:+.3e} se={r['se']:.3e} "
                         f"z={r['z']:.2f}")
        return "\n".join(lines)


TEST_FUNCTIONS = {
    "cos_phi": lambda s, phi, L: np.cos(phi),
    "cos_2phi": lambda s, phi, L: np.cos(2 * phi),
    "s_over_L": lambda s, phi, L: np.mod(s, L) / L,
}


def invariance_test(b: BoundaryCurve, n: int, seed: int, sampler: str = "mu",
                    z_max: float = 3.0) -> InvarianceReport:
    """Check that one application of the map leaves sample means unchanged.

    The before/after values of each test function are paired, so the
    standard error is that of the mean paired difference, floored at
    :data:`RESOLUTION` so exactly invariant quantities do not divide roundoff
    by roundoff.  Passes when every ``|difference| <= z_max * stderr``.
    """
    smp = sample_mu(b, n, seed, sampler)
    s1, phi1, _, status = step(b, smp.s, smp.phi)
    ok = status == OK
    L = b.total_length
    rows = []
    passed = True
    m = int(ok.sum())
    for name, f in TEST_FUNCTIONS.items():
        diff = f(s1[ok], phi1[ok], L) - f(smp.s[ok], smp.phi[ok], L)
        mean = float(diff.mean())
        se = max(float(diff.std(ddof=1) / math.sqrt(m)), RESOLUTION)
        z = abs(mean) / se
        good = z <= z_max
        passed &= good
        rows.append({"name": name, "diff": mean, "se": se, "z": z, "passed": good})
    return InvarianceReport(bool(passed), rows, m, len(smp) - m, sampler)
