"""End-to-end certification: generators in, verified certificate out.

Orchestrates the regular-pair search, norm balancing, place and wedge
selection, corner repair, exponent derivation, and the freeness oracle.
The final cone check runs in the canonical eigenbasis derived from the
certified words alone, so a verifier can replay it from the certificate
and the generator file without any pipeline state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .cayley import find_regular_pair
from .errors import (
    ExponentSearchExhausted,
    GrowthcertError,
    Inconclusive,
    PipelineFailure,
    PrecisionExhausted,
    SingularEnclosure,
)
from .exactnum import (
    SquareMatrix,
    Word,
    evaluate_word,
    format_rational,
    s_support,
)
from .pingpong import (
    DEFAULT_RADII,
    PingPongCertificate,
    derive_exponent,
    find_semigroup_collision,
    growth_bound_from_length,
    verify_cone_inclusions,
)
from .wordforge import (
    balance_or_trace,
    build_almost_algebra,
    diagonalized_pair,
    ensure_l2,
    select_place_and_wedge,
    swap_roles,
    wedge_pair,
)

_PRECISION_ERRORS = (Inconclusive, PrecisionExhausted, SingularEnclosure)


@dataclass(frozen=True)
class RunConfig:
    """Caps and schedules for one certification or verification run.

    bits_schedule doubles the interval working precision on each retry;
    constants are (c2, d2, c3, d3) for the corner and size conditions.
    """

    search_depth: int = 4
    oracle_depth: int = 12
    exponent_cap: int = 64
    budget: int = 10**6
    word_cap: int = 8
    bits_schedule: tuple[int, ...] = (64, 128, 256)
    radii: tuple[Fraction, ...] = DEFAULT_RADII
    epsilon: Fraction = Fraction(1, 1024)
    constants: tuple = (Fraction(1), Fraction(1), Fraction(1), Fraction(2))

    def __post_init__(self):
        for name in ("search_depth", "oracle_depth", "exponent_cap", "budget", "word_cap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not self.bits_schedule or not self.radii:
            raise ValueError("precision and radius schedules must be nonempty")
        if len(self.constants) != 4:
            raise ValueError("constants must be (c2, d2, c3, d3)")

    def to_json_dict(self) -> dict:
        return {
            "search_depth": self.search_depth,
            "oracle_depth": self.oracle_depth,
            "exponent_cap": self.exponent_cap,
            "budget": self.budget,
            "word_cap": self.word_cap,
            "bits_schedule": list(self.bits_schedule),
            "radii": [format_rational(r) for r in self.radii],
            "epsilon": format_rational(self.epsilon),
            "constants": [format_rational(Fraction(c)) for c in self.constants],
        }

    @staticmethod
    def from_json_dict(d: dict) -> "RunConfig":
        from .exactnum import parse_rational

        kwargs = {}
        for name in ("search_depth", "oracle_depth", "exponent_cap", "budget", "word_cap"):
            if name in d:
                kwargs[name] = int(d[name])
        if "bits_schedule" in d:
            kwargs["bits_schedule"] = tuple(int(b) for b in d["bits_schedule"])
        if "radii" in d:
            kwargs["radii"] = tuple(parse_rational(r) for r in d["radii"])
        if "epsilon" in d:
            kwargs["epsilon"] = parse_rational(d["epsilon"])
        if "constants" in d:
            kwargs["constants"] = tuple(parse_rational(c) for c in d["constants"])
        return RunConfig(**kwargs)


@dataclass(frozen=True)
class CertifyResult:
    """A validated certificate plus the per-stage trace that produced it."""

    certificate: PingPongCertificate
    trace: tuple[dict, ...]

    def trace_jsonl(self) -> str:
        return "".join(
            json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n" for rec in self.trace
        )


def _escalate(schedule, fn, retry=_PRECISION_ERRORS):
    """Run fn(bits) over the precision schedule, re-raising the last failure."""
    last = None
    for bits in schedule:
        try:
            return fn(bits)
        except retry as exc:
            last = exc
    raise last


def _word_lengths(word_a: Word, word_b: Word, e: int) -> tuple[int, int]:
    """Generator lengths of A^e B and A^2e B."""
    return (
        e * len(word_a) + len(word_b),
        2 * e * len(word_a) + len(word_b),
    )


def certify_generators(
    gens: list[SquareMatrix],
    config: RunConfig | None = None,
    s=None,
) -> CertifyResult:
    """Produce an oracle-validated freeness certificate or a staged failure.

    Stage order: regular-pair search, norm balancing (with a role swap
    when only the trace route certifies), place and wedge selection,
    corner repair, canonical re-diagonalization from the words, exponent
    derivation, freeness oracle.  Failures raise PipelineFailure carrying
    the stage name, with the trace so far on the .trace attribute.  A
    certificate is returned only after the oracle confirms zero collisions.
    """
    config = config or RunConfig()
    if not gens:
        raise ValueError("empty generator list")
    if s is None:
        s = s_support(gens)
    trace: list[dict] = []

    def fail(stage: str, exc: Exception):
        trace.append(
            {"stage": stage, "ok": False, "error": type(exc).__name__, "detail": str(exc)}
        )
        failure = PipelineFailure(stage, f"{type(exc).__name__}: {exc}")
        failure.trace = tuple(trace)
        raise failure from exc

    try:
        seed = find_regular_pair(gens, config.search_depth, s, config.budget)
    except GrowthcertError as exc:
        fail("find_regular_pair", exc)
    trace.append(
        {
            "stage": "find_regular_pair",
            "ok": True,
            "word_A": str(seed.word_a),
            "word_B": str(seed.word_b),
            "disc": format_rational(seed.disc),
            "burnside_dim": seed.genericity["burnside_dim"],
        }
    )

    # non-gating diagnostic: how close {A, B, AB} is to spanning an algebra
    try:
        aa = build_almost_algebra(
            [seed.matrix_a, seed.matrix_b, seed.matrix_a * seed.matrix_b], config.epsilon
        )
        trace.append(
            {
                "stage": "algebra_diagnostic",
                "ok": True,
                "dimension": aa.dimension,
                "closure_defect": format_rational(aa.closure_defect),
            }
        )
    except GrowthcertError as exc:
        trace.append(
            {
                "stage": "algebra_diagnostic",
                "ok": False,
                "error": type(exc).__name__,
                "detail": str(exc),
            }
        )

    try:
        pair = _escalate(
            config.bits_schedule,
            lambda bits: balance_or_trace(
                seed.matrix_a,
                seed.matrix_b,
                s,
                seed.word_a,
                seed.word_b,
                m_cap=config.word_cap,
                bits=bits,
            ),
        )
    except GrowthcertError as exc:
        fail("balance_or_trace", exc)
    trace.append(
        {
            "stage": "balance_or_trace",
            "ok": True,
            "relation": pair.norm_relation,
            "constants": [format_rational(Fraction(c)) for c in pair.constants],
            "exact_basis": pair.exact,
            "word_B": str(pair.word_b),
        }
    )

    if pair.norm_relation == "trace_big":
        try:
            pair = _escalate(config.bits_schedule, lambda bits: swap_roles(pair, s, bits=bits))
        except GrowthcertError as exc:
            fail("swap_roles", exc)
        trace.append(
            {
                "stage": "swap_roles",
                "ok": True,
                "word_A": str(pair.word_a),
                "word_B": str(pair.word_b),
            }
        )

    try:
        v, m = select_place_and_wedge(pair, s)
    except GrowthcertError as exc:
        fail("select_place_and_wedge", exc)
    trace.append({"stage": "select_place_and_wedge", "ok": True, "place": str(v), "wedge_m": m})

    try:
        word_b_final, cond, sym = _escalate(
            config.bits_schedule,
            lambda bits: ensure_l2(pair, v, m, config.word_cap, config.constants, bits),
        )
    except GrowthcertError as exc:
        fail("ensure_l2", exc)
    trace.append(
        {
            "stage": "ensure_l2",
            "ok": True,
            "replacement": str(sym),
            "word_B": str(word_b_final),
            "l_conditions": [cond.l1, cond.l2, cond.l3],
        }
    )

    word_a_final = pair.word_a
    a_mat = evaluate_word(word_a_final, gens)
    b_mat = evaluate_word(word_b_final, gens)

    def canonical(bits: int):
        cpair = diagonalized_pair(
            a_mat, b_mat, s, word_a_final, word_b_final, sort_place=v, bits=bits
        )
        wa, wb = wedge_pair(cpair, v, m, bits)
        return derive_exponent(wa, wb, v, config.radii, config.exponent_cap, bits)

    try:
        e, r, checks = _escalate(
            config.bits_schedule,
            canonical,
            retry=_PRECISION_ERRORS + (ExponentSearchExhausted,),
        )
    except GrowthcertError as exc:
        fail("derive_exponent", exc)
    trace.append(
        {
            "stage": "derive_exponent",
            "ok": True,
            "exponent": e,
            "cone_param": format_rational(r),
        }
    )

    u = a_mat**e * b_mat
    w = a_mat ** (2 * e) * b_mat
    try:
        collision = find_semigroup_collision(u, w, config.oracle_depth, config.budget)
    except GrowthcertError as exc:
        fail("freeness_oracle", exc)
    if collision is not None:
        # the cone proof and the oracle disagree: refuse to emit anything
        fail(
            "freeness_oracle",
            GrowthcertError(f"collision {collision[0]!r} = {collision[1]!r}"),
        )
    trace.append({"stage": "freeness_oracle", "ok": True, "depth": config.oracle_depth})

    len_u, len_w = _word_lengths(word_a_final, word_b_final, e)
    bound = growth_bound_from_length(max(len_u, len_w))
    cert = PingPongCertificate(
        n=gens[0].n,
        word_a=word_a_final,
        word_b=word_b_final,
        place=v,
        wedge_m=m,
        exponent=e,
        cone_param=r,
        checks=checks,
        growth_bound=bound,
        oracle_depth_validated=config.oracle_depth,
    )
    trace.append(
        {
            "stage": "certificate",
            "ok": True,
            "growth_bound": format_rational(bound),
            "max_word_length": max(len_u, len_w),
        }
    )
    return CertifyResult(certificate=cert, trace=tuple(trace))


def verify_certificate(
    cert: PingPongCertificate,
    gens: list[SquareMatrix],
    config: RunConfig | None = None,
) -> tuple[bool, str]:
    """Re-derive every certified fact of a certificate from scratch.

    Checks, in order: dimension agreement, word evaluation, the growth
    bound recomputation (exact equality), the cone inclusions in the
    canonical eigenbasis over the precision schedule, and the freeness
    oracle at the recorded depth.  Returns (False, reason) at the first
    failure and never raises on tampered input.
    """
    config = config or RunConfig()
    if not gens:
        return False, "empty generator list"
    if cert.n != gens[0].n:
        return False, f"certificate dimension {cert.n} != generator dimension {gens[0].n}"
    if len(cert.word_a) < 1 or len(cert.word_b) < 1:
        return False, "certificate words must be nonempty"
    if not 1 <= cert.wedge_m < cert.n:
        return False, f"wedge degree {cert.wedge_m} out of range for n={cert.n}"
    try:
        a_mat = evaluate_word(cert.word_a, gens)
        b_mat = evaluate_word(cert.word_b, gens)
    except GrowthcertError as exc:
        return False, f"word evaluation failed: {exc}"

    len_u, len_w = _word_lengths(cert.word_a, cert.word_b, cert.exponent)
    if cert.growth_bound != growth_bound_from_length(max(len_u, len_w)):
        return False, "growth bound does not match the word lengths"

    s = s_support(gens)
    checks = None
    last: Exception | None = None
    for bits in config.bits_schedule:
        try:
            cpair = diagonalized_pair(
                a_mat, b_mat, s, cert.word_a, cert.word_b, sort_place=cert.place, bits=bits
            )
            wa, wb = wedge_pair(cpair, cert.place, cert.wedge_m, bits)
            out = verify_cone_inclusions(
                wa, wb, cert.exponent, cert.cone_param, cert.place, bits
            )
        except (GrowthcertError, ValueError) as exc:
            last = exc
            continue
        if out.all_pass:
            checks = out
            break
    if checks is None:
        detail = str(last) if last is not None else "an inclusion failed at every precision"
        return False, f"cone checks did not certify: {detail}"

    u = a_mat**cert.exponent * b_mat
    w = a_mat ** (2 * cert.exponent) * b_mat
    collision = find_semigroup_collision(
        u, w, cert.oracle_depth_validated, config.budget
    )
    if collision is not None:
        return False, f"oracle collision: {collision[0]!r} = {collision[1]!r}"
    return True, "ok"
