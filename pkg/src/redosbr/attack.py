"""Attack-input families, dynamic measurement, and growth fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .matcher import DEFAULT_LIMIT, CompiledMfa, bt_run

# Version tag for the step cost accounting (successful consuming steps plus
# per-character backreference comparison work); reported in measurement output
# so fits from different accounting rules are never mixed.
COST_MODEL_VERSION = "cost-model/1"


class NoNegativeSuffix(RuntimeError):
    """No code point can serve as the failing suffix for this finding."""


@dataclass
class AttackFamily:
    """A parameterized family of adversarial inputs.

    P1 is single-pump (k); P2/P3 are two-pump (k1, k2) and are laddered on
    the diagonal k1 = k2 by default.
    """

    kind: str
    unit: str
    prefix: str = ""
    right: str = ""
    fence: str = ""
    nsuffix: str = ""
    u_l: int = 0
    u_p: int = 1
    u_r: int = 0
    u_b: int = 0
    u_o: int = 1

    @property
    def arity(self) -> int:
        return 1 if self.kind == "P1" else 2

    def materialize(self, k1: int, k2: int | None = None, repeats: int = 1) -> str:
        w = self.unit
        if repeats != 1 and self.kind != "P2":
            raise ValueError("repeats is only meaningful for the two-block layout")
        if self.kind == "P1":
            reps = 2 * (self.u_l + k1 * self.u_p + self.u_r) + self.u_b
            return self.prefix + w * reps + self.nsuffix
        if k2 is None:
            k2 = k1
        if self.kind == "P2":
            # Stacking extra pump+right+fence copies gives the capture group
            # several viable end points; each one replays the quadratic
            # backreference scan over the evaluation block.
            cap = self.u_l + k1 * self.u_p
            ev = k2 * self.u_o + self.u_b + cap
            core = w * cap + self.right + self.fence
            return self.prefix + core * repeats + w * ev + self.nsuffix
        if self.kind == "P3":
            cap = self.u_l + k1 * self.u_p
            mid = k2 * self.u_o + self.u_r + self.u_b
            return (
                self.prefix
                + w * cap
                + self.fence
                + w * mid
                + w * cap
                + self.fence
                + w * self.u_r
                + self.nsuffix
            )
        raise ValueError(f"no input family for kind {self.kind}")

    def to_json(self):
        return {
            "kind": self.kind,
            "unit": self.unit,
            "prefix": self.prefix,
            "right": self.right,
            "fence": self.fence,
            "nsuffix": self.nsuffix,
            "exponents": {
                "u_l": self.u_l,
                "u_p": self.u_p,
                "u_r": self.u_r,
                "u_b": self.u_b,
                "u_o": self.u_o,
            },
            "arity": self.arity,
        }

    @staticmethod
    def from_json(d):
        e = d.get("exponents", {})
        return AttackFamily(
            kind=d["kind"],
            unit=d["unit"],
            prefix=d.get("prefix", ""),
            right=d.get("right", ""),
            fence=d.get("fence", ""),
            nsuffix=d.get("nsuffix", ""),
            **{k: e.get(k, 1 if k in ("u_p", "u_o") else 0) for k in ("u_l", "u_p", "u_r", "u_b", "u_o")},
        )


def family_from_finding(finding) -> AttackFamily:
    if finding.kind not in ("P1", "P2", "P3"):
        raise ValueError(f"no attack family for {finding.kind} findings")
    if finding.nsuffix is None:
        raise NoNegativeSuffix(f"finding on group {finding.group} has no usable negative suffix")
    e = finding.exponents
    return AttackFamily(
        kind=finding.kind,
        unit=finding.unit,
        prefix=finding.prefix or "",
        right=finding.right or "",
        fence=finding.fence or "",
        nsuffix=finding.nsuffix,
        u_l=e.get("u_l", 0),
        u_p=e.get("u_p", 1),
        u_r=e.get("u_r", 0),
        u_b=e.get("u_b", 0),
        u_o=e.get("u_o", 1),
    )


@dataclass
class MeasureSample:
    length: int
    steps: int
    aborted: bool
    k: int | None = None

    def to_json(self):
        return {"length": self.length, "steps": self.steps, "aborted": self.aborted, "k": self.k}


def measure_inputs(compiled, inputs, anchored=True, limit=None, ks=None):
    """Exhaustive-mode step counts for a list of inputs."""
    if not isinstance(compiled, CompiledMfa):
        compiled = CompiledMfa(compiled)
    out = []
    for i, s in enumerate(inputs):
        r = bt_run(compiled, s, anchored=anchored, exhaustive=True, limit=limit)
        out.append(MeasureSample(len(s), r.steps, r.aborted, ks[i] if ks else None))
        if r.aborted:
            break
    return out


def measure_family(compiled, family: AttackFamily, ks, anchored=True, limit=None):
    inputs = [family.materialize(k) for k in ks]
    return measure_inputs(compiled, inputs, anchored=anchored, limit=limit, ks=list(ks))


# ---------------------------------------------------------------------------
# Polynomial growth fitting


@dataclass
class GrowthFit:
    degree: int
    r2: float
    coeffs: list
    stderrs: list
    samples: list = field(default_factory=list)

    def to_json(self):
        return {
            "degree": self.degree,
            "r2": self.r2,
            "coeffs": self.coeffs,
            "stderrs": self.stderrs,
        }


def fit_growth(lengths, steps, max_degree=4, share=0.05, sigma_mult=3.0) -> GrowthFit:
    """Least-squares fit of steps ~ sum c_d n^d, d = 0..max_degree.

    The dominant degree is the largest d >= 1 whose term contributes more
    than `share` of the fitted value at the longest input and whose
    coefficient exceeds `sigma_mult` standard errors. Lengths are rescaled
    to [0, 1] before solving so the normal equations stay conditioned.
    """
    n = np.asarray(lengths, dtype=float)
    y = np.asarray(steps, dtype=float)
    if len(n) < max_degree + 2:
        raise ValueError(f"ill-conditioned ladder: need at least {max_degree + 2} samples")
    if n.min() <= 0 or n.max() / n.min() < 8:
        raise ValueError("ill-conditioned ladder: length span must be at least 8x")
    t = n / n.max()
    X = np.vander(t, max_degree + 1, increasing=True)
    coef, _res, _rank, _sv = np.linalg.lstsq(X, y, rcond=None)
    fitted = X @ coef
    rss = float(np.sum((y - fitted) ** 2))
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if tss == 0 else 1.0 - rss / tss
    dof = len(n) - (max_degree + 1)
    sigma2 = rss / dof if dof > 0 else 0.0
    try:
        cov = np.linalg.inv(X.T @ X) * sigma2
        se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    except np.linalg.LinAlgError:
        se = np.full(max_degree + 1, math.inf)
    value_at_max = float(abs(X[-1] @ coef)) or 1.0
    degree = 0
    for d in range(1, max_degree + 1):
        c = coef[d]
        if c <= 0:
            continue
        if c < share * value_at_max:
            continue
        if se[d] > 0 and c <= sigma_mult * se[d]:
            continue
        degree = d
    return GrowthFit(
        degree=degree,
        r2=r2,
        coeffs=[float(c) for c in coef],
        stderrs=[float(s) for s in se],
        samples=[(int(a), float(b)) for a, b in zip(lengths, steps)],
    )


DEFAULT_LADDER = (8, 12, 16, 24, 32, 48, 64, 96, 128)


@dataclass
class ValidationResult:
    confirmed: bool
    evidence: str  # 'fit' | 'limit' | 'unavailable'
    fit: GrowthFit | None
    samples: list

    def to_json(self):
        return {
            "confirmed": self.confirmed,
            "evidence": self.evidence,
            "fit": self.fit.to_json() if self.fit else None,
            "samples": [s.to_json() for s in self.samples],
        }


def validate_finding(compiled, finding, ladder=DEFAULT_LADDER, anchored=True, limit=None) -> ValidationResult:
    """Dynamically confirm a static finding: superlinear fitted growth, or a
    run that trips the step budget outright."""
    try:
        fam = family_from_finding(finding)
    except (NoNegativeSuffix, ValueError) as e:
        return ValidationResult(False, f"unavailable: {e}", None, [])
    if limit is None:
        limit = DEFAULT_LIMIT
    samples = measure_family(compiled, fam, list(ladder), anchored=anchored, limit=limit)
    if any(s.aborted for s in samples):
        return ValidationResult(True, "limit", None, samples)
    # Large fixed prefixes/fences can leave the ladder with too little length
    # spread for a stable fit; extend with larger pump counts until the
    # longest input is at least 8x the shortest.
    max_k = max(ladder)
    while samples[-1].length < 8 * samples[0].length and max_k <= 65536:
        max_k *= 2
        extra = measure_family(compiled, fam, [max_k], anchored=anchored, limit=limit)
        samples.extend(extra)
        if any(s.aborted for s in extra):
            return ValidationResult(True, "limit", None, samples)
    try:
        fit = fit_growth([s.length for s in samples], [s.steps for s in samples])
    except ValueError as e:
        return ValidationResult(False, f"unavailable: {e}", None, samples)
    return ValidationResult(fit.degree >= 2 and fit.r2 >= 0.99, "fit", fit, samples)
