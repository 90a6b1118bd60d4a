"""End-to-end runs: exact transport, effective factorization, signal readout.

A run builds the prepared states on commensurate grids, applies the two
transport steps exactly as index permutations, constructs the effective
branch states and their overlaps, evaluates the measurement formulas, and
checks them against a direct grid contraction of the final state. The
formulas and the grid must agree to 1e-6 or the run aborts; the residual is
reported either way.

The report also carries the recovery chain (signal -> far overlap ->
coupling invariant), fidelities between the exact and effective states, and
the norm audit of every constructed effective factor.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .analytics import (
    GaussianScenario,
    SignalInputs,
    expectation_with_interaction,
    expectation_without_interaction,
    gamma3_closed_form,
    gamma3_oracle,
    invert_delta_to_gamma3,
    invert_gamma3_to_G,
)
from .effective import EffectivePair, effective_tripartite, make_chi_pm, make_phi_pm
from .errors import (
    ConfigError,
    ConsistencyAbort,
    DegenerateChannel,
    GridMismatch,
    IncommensurateShear,
    NoConvergence,
    OutOfRange,
    ValidationError,
)
from .grids import (
    Grid,
    SupportSpec,
    Wavefunction,
    bump_wf,
    density_moments,
    gaussian_wf,
    grids_equal,
    normalize,
    superpose,
)
from .gridplan import plan_grids, resolve_profile
from .states import (
    Operator1,
    TensorState,
    attach,
    commensurate_ratio,
    dyad_operator,
    entangled_pair,
    expect_local,
    marginal_density,
    overlap_states,
    product,
    shear,
    state_norm,
)

# Formula-vs-grid agreement required for a run to stand.
CONSISTENCY_TOL = 1e-6

SWEEP_PARAMS = ("g12", "g23", "T", "beta2", "sigma2", "a_weight")


@dataclass(frozen=True)
class GaussianSpec:
    """Mean and variance of a Gaussian carrier (see gaussian_wf for how the
    active convention reads the variance)."""

    mean: float
    variance: float


@dataclass(frozen=True)
class Preparation:
    a: complex
    b: complex
    psi_plus: SupportSpec
    psi_minus: SupportSpec
    phi0: GaussianSpec


@dataclass(frozen=True)
class CouplingSchedule:
    """Piecewise-impulsive schedule: the near coupling g12 acts on [t0, t1],
    the far coupling g23 on [t2, t3], readout at t4. Only the accumulated
    strengths d12 = g12 (t1 - t0) and c23 = g23 (t3 - t2) enter the dynamics.
    """

    t0: float
    t1: float
    t2: float
    t3: float
    t4: float
    g12: float
    g23: float
    vr_active_during_vn23: bool = True

    @property
    def d12(self) -> float:
        return self.g12 * (self.t1 - self.t0)

    @property
    def T(self) -> float:
        return self.t3 - self.t2

    @property
    def c23(self) -> float:
        return self.g23 * self.T


@dataclass(frozen=True)
class ProtocolConfig:
    preparation: Preparation
    schedule: CouplingSchedule
    beta2: float
    observable: np.ndarray
    alice_switch: bool = True
    detection_threshold: float = 1e-4
    profile: str | None = None
    gamma_convention: str = "normalized"
    gaussian_convention: str = "density"
    grids: tuple[Grid, Grid, Grid] | None = None

    def __post_init__(self):
        m = np.array(self.observable, dtype=np.complex128)
        m.flags.writeable = False
        object.__setattr__(self, "observable", m)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str


def validate(config: ProtocolConfig) -> tuple[Diagnostic, ...]:
    """Collect every reason the config cannot run; empty means runnable.

    Never raises: malformed values become diagnostics so a caller can show
    all of them at once.
    """
    diags: list[Diagnostic] = []
    p, s = config.preparation, config.schedule

    numbers = {
        "a": complex(p.a),
        "b": complex(p.b),
        "psi_plus.lo": p.psi_plus.lo,
        "psi_plus.hi": p.psi_plus.hi,
        "psi_minus.lo": p.psi_minus.lo,
        "psi_minus.hi": p.psi_minus.hi,
        "phi0.mean": p.phi0.mean,
        "phi0.variance": p.phi0.variance,
        "beta2": config.beta2,
        "t0": s.t0,
        "t1": s.t1,
        "t2": s.t2,
        "t3": s.t3,
        "t4": s.t4,
        "g12": s.g12,
        "g23": s.g23,
        "detection_threshold": config.detection_threshold,
    }
    bad = [
        name
        for name, v in numbers.items()
        if not (math.isfinite(complex(v).real) and math.isfinite(complex(v).imag))
    ]
    if bad:
        diags.append(
            Diagnostic("non_finite", f"non-finite config values: {', '.join(bad)}")
        )

    weight = abs(complex(p.a)) ** 2 + abs(complex(p.b)) ** 2
    if not abs(weight - 1.0) <= 1e-9:
        diags.append(
            Diagnostic(
                "bad_coefficients",
                f"|a|^2 + |b|^2 = {weight!r} must equal 1 within 1e-9",
            )
        )

    if not (p.psi_plus.hi <= p.psi_minus.lo or p.psi_minus.hi <= p.psi_plus.lo):
        diags.append(
            Diagnostic(
                "overlapping_supports",
                "the branch supports overlap; exact orthogonality of the"
                " pointer states needs disjoint supports",
            )
        )

    if not (s.t0 < s.t1 <= s.t2 < s.t3 <= s.t4):
        diags.append(
            Diagnostic(
                "time_order",
                f"schedule must satisfy t0 < t1 <= t2 < t3 <= t4, got"
                f" ({s.t0}, {s.t1}, {s.t2}, {s.t3}, {s.t4})",
            )
        )

    if s.g12 < 0 or s.g23 < 0:
        diags.append(
            Diagnostic("negative_coupling", f"g12={s.g12}, g23={s.g23} must be >= 0")
        )

    if not p.phi0.variance > 0 or not config.beta2 > 0:
        diags.append(
            Diagnostic(
                "nonpositive_variance",
                f"phi0.variance={p.phi0.variance} and beta2={config.beta2}"
                " must be positive",
            )
        )

    if not config.detection_threshold > 0:
        diags.append(
            Diagnostic(
                "bad_threshold",
                f"detection_threshold={config.detection_threshold} must be positive",
            )
        )

    m = config.observable
    if m.shape != (2, 2):
        diags.append(
            Diagnostic("bad_observable", f"observable must be 2x2, got shape {m.shape}")
        )
    else:
        if not np.array_equal(m, m.conj().T):
            diags.append(
                Diagnostic("non_hermitian", "observable matrix is not Hermitian")
            )
        elif config.alice_switch and abs(m[0, 1]) <= 1e-12:
            diags.append(
                Diagnostic(
                    "alpha_zero",
                    "the observable's cross element alpha is zero, which blanks"
                    " the only channel the switch can reach; signal runs are"
                    " rejected",
                )
            )

    if config.alice_switch and not s.vr_active_during_vn23:
        diags.append(
            Diagnostic(
                "vr_gating",
                "alice_switch requires the reference potential to stay active"
                " through the far-coupling window (vr_active_during_vn23);"
                " without it the effective factorization does not describe"
                " the dynamics, so the run is rejected",
            )
        )

    if config.gamma_convention not in ("normalized", "raw"):
        diags.append(
            Diagnostic(
                "bad_convention",
                f"gamma_convention {config.gamma_convention!r} must be"
                " 'normalized' or 'raw'",
            )
        )
    if config.gaussian_convention not in ("density", "amplitude"):
        diags.append(
            Diagnostic(
                "bad_convention",
                f"gaussian_convention {config.gaussian_convention!r} must be"
                " 'density' or 'amplitude'",
            )
        )

    if config.grids is not None:
        g1, g2, g3 = config.grids
        try:
            commensurate_ratio(s.d12, g1, g2)
        except IncommensurateShear as e:
            diags.append(Diagnostic("incommensurate", f"near shift: {e}"))
        if config.alice_switch:
            try:
                commensurate_ratio(s.c23, g2, g3)
            except IncommensurateShear as e:
                diags.append(Diagnostic("incommensurate", f"far shift: {e}"))
        for name, spec in (("psi_plus", p.psi_plus), ("psi_minus", p.psi_minus)):
            if not (spec.lo > g1.min and spec.hi < g1.max):
                diags.append(
                    Diagnostic(
                        "support_outside",
                        f"{name} support ({spec.lo}, {spec.hi}) is not strictly"
                        f" inside the first grid [{g1.min}, {g1.max}]",
                    )
                )

    return tuple(diags)


def detect_decision(
    e_measured: float, e_reference_without: float, threshold: float
) -> bool:
    """Decision rule: the measured expectation differs from the
    no-interaction reference by more than the threshold."""
    if not (math.isfinite(threshold) and threshold > 0):
        raise ValueError(f"detection threshold must be positive, got {threshold}")
    return abs(e_reference_without - e_measured) > threshold


@dataclass(frozen=True)
class ProtocolReport:
    """Everything a run measures, derives, and audits.

    Overlap fields keep both the raw values (states exactly as constructed)
    and the normalized ones (unit branch states); `gamma_convention` says
    which pair fed the formula fields. expectation_grid is the direct
    contraction of the final state; expectation_exact_state the same
    contraction on the exact (unfactorized) state.
    """

    alice_switch: bool
    profile: str
    gamma_convention: str
    gaussian_convention: str
    d12: float
    c23: float
    g_configured: float
    gamma2_raw: complex
    gamma2_normalized: complex
    gamma3_raw: complex
    gamma3_normalized: complex
    gamma3_oracle: float | None
    gamma3_closed_form: float | None
    closed_form_exceeds_unit: bool | None
    oracle_closed_ratio: float | None
    expectation_with: float
    expectation_without: float
    delta: float
    expectation_grid: float
    expectation_exact_state: float
    consistency_gap: float
    decision_detected: bool
    detection_threshold: float
    gamma3_recovered: float | None
    g_recovered: float | None
    scenario: GaussianScenario | None
    overlap_bipartite: complex
    fidelity_bipartite: float
    overlap_tripartite: complex | None
    fidelity_tripartite: float | None
    norm_phi_plus: float
    norm_phi_minus: float
    norm_chi_plus: float | None
    norm_chi_minus: float | None
    q1_integral_deviation: tuple[float, float] | None
    r12: int
    r23: int
    grid_descriptors: tuple[dict, dict, dict]
    grid_layout: tuple[str, ...]
    notes: tuple[str, ...]

    @property
    def selected_gamma2(self) -> complex:
        if self.gamma_convention == "raw":
            return self.gamma2_raw
        return self.gamma2_normalized

    @property
    def selected_gamma3(self) -> complex:
        if self.gamma_convention == "raw":
            return self.gamma3_raw
        return self.gamma3_normalized


@dataclass(frozen=True)
class RunArtifacts:
    """Grid-level objects a run produced, for plotting and state export."""

    psi_plus: Wavefunction
    psi_minus: Wavefunction
    phi0: Wavefunction
    chi0: Wavefunction
    phi_pair: EffectivePair
    chi_pair: EffectivePair | None
    phi_hat_plus: Wavefunction
    phi_hat_minus: Wavefunction
    chi_hat_plus: Wavefunction | None
    chi_hat_minus: Wavefunction | None
    final_state: TensorState
    exact_state: TensorState | None
    grids: tuple[Grid, Grid, Grid]
    operator: Operator1


def run_full(config: ProtocolConfig) -> tuple[ProtocolReport, RunArtifacts]:
    """Run the protocol and return the report plus the grid-level artifacts.

    Raises ValidationError when validate() finds anything, and
    ConsistencyAbort when the formulas and the grid contraction disagree
    beyond 1e-6. The
    consistency check always compares the grid against the normalized-overlap
    formulas (the final grid state is built from unit branch states); the
    reported expectation fields follow `gamma_convention`.
    """
    diags = validate(config)
    if diags:
        raise ValidationError(
            "config rejected: " + "; ".join(f"[{d.code}] {d.message}" for d in diags)
        )
    profile = resolve_profile(config.profile)
    p, s = config.preparation, config.schedule
    d12 = s.d12
    c23 = s.c23 if config.alice_switch else 0.0
    notes: list[str] = []

    if config.grids is not None:
        g1, g2, g3 = config.grids
        r12 = commensurate_ratio(d12, g1, g2)
        r23 = commensurate_ratio(c23, g2, g3)
        layout = (
            "explicit grids supplied; layout planning skipped",
            f"r12 = {r12}, r23 = {r23}",
        )
    else:
        hull = (
            min(p.psi_plus.lo, p.psi_minus.lo),
            max(p.psi_plus.hi, p.psi_minus.hi),
        )
        half = 0.5 if config.gaussian_convention == "amplitude" else 1.0
        plan = plan_grids(
            psi_hull=hull,
            phi0_mean=p.phi0.mean,
            phi0_density_variance=p.phi0.variance * half,
            chi0_density_variance=config.beta2 * half,
            d12=d12,
            c23=c23,
            profile=profile,
        )
        g1, g2, g3 = plan.grids
        r12, r23 = plan.r12, plan.r23
        layout = plan.lines

    psi_p = bump_wf(g1, p.psi_plus)
    psi_m = bump_wf(g1, p.psi_minus)
    phi0 = gaussian_wf(g2, p.phi0.mean, p.phi0.variance, config.gaussian_convention)
    chi0 = gaussian_wf(g3, 0.0, config.beta2, config.gaussian_convention)
    op = dyad_operator(psi_p, psi_m, config.observable)

    # exact near transport and its effective factorization
    zeta = superpose(p.a, psi_p, p.b, psi_m)
    exact12 = shear(product(zeta, phi0), 0, 1, d12)
    pair2 = make_phi_pm(psi_p, psi_m, phi0, d12)
    eff12_raw = entangled_pair(p.a, psi_p, pair2.plus, p.b, psi_m, pair2.minus)
    ov12 = overlap_states(exact12, eff12_raw)
    fid12 = abs(ov12) / (state_norm(exact12) * state_norm(eff12_raw))
    phi_hat_p = normalize(pair2.plus)
    phi_hat_m = normalize(pair2.minus)

    if config.alice_switch:
        init3 = attach(
            entangled_pair(p.a, psi_p, phi_hat_p, p.b, psi_m, phi_hat_m), chi0
        )
        exact3: TensorState | None = shear(init3, 1, 2, c23)
        pair3: EffectivePair | None = make_chi_pm(
            psi_p, psi_m, pair2.plus, pair2.minus, chi0, s.g23, s.T
        )
        chi_hat_p: Wavefunction | None = normalize(pair3.plus)
        chi_hat_m: Wavefunction | None = normalize(pair3.minus)
        gamma3_raw = pair3.gamma
        gamma3_n = pair3.gamma_normalized
        final = effective_tripartite(
            p.a, psi_p, phi_hat_p, chi_hat_p, p.b, psi_m, phi_hat_m, chi_hat_m
        )
        ov3 = overlap_states(exact3, final)
        fid3 = abs(ov3) / (state_norm(exact3) * state_norm(final))
        exp_exact = expect_local(exact3, 0, op)
        chi_norms = (pair3.norm_plus, pair3.norm_minus)
        q1_dev = pair3.weight_integral_deviation
    else:
        final = attach(
            entangled_pair(p.a, psi_p, phi_hat_p, p.b, psi_m, phi_hat_m), chi0
        )
        exact3 = None
        pair3 = None
        chi_hat_p = chi_hat_m = None
        # the far coupling never acts, so the branch carriers coincide
        gamma3_raw = complex(1.0)
        gamma3_n = complex(1.0)
        ov3 = None
        fid3 = None
        chi_norms = None
        q1_dev = None

    exp_grid = expect_local(final, 0, op)
    if exact3 is None:
        exp_exact = exp_grid

    si_norm = SignalInputs(
        p.a, p.b, pair2.gamma_normalized, gamma3_n, op.alpha, op.a_pp, op.a_mm
    )
    e_with_n = expectation_with_interaction(si_norm)
    e_without_n = expectation_without_interaction(si_norm)
    branch_formula = e_with_n if config.alice_switch else e_without_n
    gap = abs(exp_grid - branch_formula)
    if gap > CONSISTENCY_TOL:
        raise ConsistencyAbort(
            f"grid expectation {exp_grid!r} vs formula {branch_formula!r}:"
            f" gap {gap:.3e} exceeds {CONSISTENCY_TOL}"
        )

    if config.gamma_convention == "raw":
        si_rep = SignalInputs(
            p.a, p.b, pair2.gamma, gamma3_raw, op.alpha, op.a_pp, op.a_mm
        )
        notes.append(
            "expectation fields use raw branch overlaps; the consistency"
            " check always uses the normalized ones"
        )
    else:
        si_rep = si_norm
    e_with = expectation_with_interaction(si_rep)
    e_without = expectation_without_interaction(si_rep)
    delta_rep = e_without - e_with

    decision = detect_decision(exp_grid, e_without_n, config.detection_threshold)

    gamma3_rec: float | None = None
    try:
        gamma3_rec = invert_delta_to_gamma3(
            delta_rep, p.a, p.b, si_rep.gamma2, op.alpha
        )
    except (ValueError, DegenerateChannel) as e:
        notes.append(f"overlap recovery skipped: {e}")

    # all-Gaussian idealization built from the measured branch moments
    m_p, v_p = density_moments(phi_hat_p)
    m_m, v_m = density_moments(phi_hat_m)
    v_bar = 0.5 * (v_p + v_m)
    sigma2_scen = v_bar if config.gaussian_convention == "density" else 2.0 * v_bar
    g23_eff = s.g23 if config.alice_switch else 0.0
    scenario = GaussianScenario(
        m_plus=m_p,
        m_minus=m_m,
        sigma2=sigma2_scen,
        beta2=config.beta2,
        g23=g23_eff,
        T=s.T,
        convention=config.gaussian_convention,
    )
    g_configured = scenario.big_g

    g3_oracle: float | None = None
    try:
        g3_oracle = gamma3_oracle(scenario)
    except NoConvergence as e:
        notes.append(f"oracle overlap unavailable: {e}")
    g3_closed = gamma3_closed_form(scenario)
    closed_exceeds = g3_closed > 1.0 + 1e-12
    if closed_exceeds:
        notes.append(
            "closed-form overlap exceeds 1; reported verbatim and flagged,"
            " never clamped"
        )
    ratio = None
    if g3_oracle is not None and g3_closed > 0:
        ratio = g3_oracle / g3_closed

    g_rec: float | None = None
    if gamma3_rec is not None:
        try:
            g_rec = invert_gamma3_to_G(gamma3_rec, scenario, mode="oracle")
        except (OutOfRange, DegenerateChannel, NoConvergence) as e:
            notes.append(f"coupling recovery skipped: {e}")

    report = ProtocolReport(
        alice_switch=config.alice_switch,
        profile=profile,
        gamma_convention=config.gamma_convention,
        gaussian_convention=config.gaussian_convention,
        d12=d12,
        c23=c23,
        g_configured=g_configured,
        gamma2_raw=pair2.gamma,
        gamma2_normalized=pair2.gamma_normalized,
        gamma3_raw=gamma3_raw,
        gamma3_normalized=gamma3_n,
        gamma3_oracle=g3_oracle,
        gamma3_closed_form=g3_closed,
        closed_form_exceeds_unit=closed_exceeds,
        oracle_closed_ratio=ratio,
        expectation_with=e_with,
        expectation_without=e_without,
        delta=delta_rep,
        expectation_grid=exp_grid,
        expectation_exact_state=exp_exact,
        consistency_gap=gap,
        decision_detected=decision,
        detection_threshold=config.detection_threshold,
        gamma3_recovered=gamma3_rec,
        g_recovered=g_rec,
        scenario=scenario,
        overlap_bipartite=ov12,
        fidelity_bipartite=fid12,
        overlap_tripartite=ov3,
        fidelity_tripartite=fid3,
        norm_phi_plus=pair2.norm_plus,
        norm_phi_minus=pair2.norm_minus,
        norm_chi_plus=None if chi_norms is None else chi_norms[0],
        norm_chi_minus=None if chi_norms is None else chi_norms[1],
        q1_integral_deviation=q1_dev,
        r12=r12,
        r23=r23,
        grid_descriptors=(g1.descriptor(), g2.descriptor(), g3.descriptor()),
        grid_layout=tuple(layout),
        notes=tuple(notes),
    )
    artifacts = RunArtifacts(
        psi_plus=psi_p,
        psi_minus=psi_m,
        phi0=phi0,
        chi0=chi0,
        phi_pair=pair2,
        chi_pair=pair3,
        phi_hat_plus=phi_hat_p,
        phi_hat_minus=phi_hat_m,
        chi_hat_plus=chi_hat_p,
        chi_hat_minus=chi_hat_m,
        final_state=final,
        exact_state=exact3,
        grids=(g1, g2, g3),
        operator=op,
    )
    return report, artifacts


def run(config: ProtocolConfig) -> ProtocolReport:
    """Run the protocol and return the report alone."""
    return run_full(config)[0]


def apply_sweep_param(config: ProtocolConfig, name: str, value: float) -> ProtocolConfig:
    """New config with one swept quantity replaced.

    T moves t3 (and shifts t4 to keep the readout gap); a_weight sets
    a = v, b = sqrt(1 - v^2) for real v in [0, 1].
    """
    v = float(value)
    p, s = config.preparation, config.schedule
    if name == "g12":
        return replace(config, schedule=replace(s, g12=v))
    if name == "g23":
        return replace(config, schedule=replace(s, g23=v))
    if name == "T":
        if v <= 0:
            raise ConfigError(f"sweep value for T must be positive, got {v}")
        new_t3 = s.t2 + v
        return replace(
            config, schedule=replace(s, t3=new_t3, t4=new_t3 + (s.t4 - s.t3))
        )
    if name == "beta2":
        return replace(config, beta2=v)
    if name == "sigma2":
        return replace(
            config, preparation=replace(p, phi0=GaussianSpec(p.phi0.mean, v))
        )
    if name == "a_weight":
        if not 0.0 <= v <= 1.0:
            raise ConfigError(f"a_weight must lie in [0, 1], got {v}")
        return replace(
            config,
            preparation=replace(
                p, a=complex(v), b=complex(math.sqrt(max(0.0, 1.0 - v * v)))
            ),
        )
    raise ConfigError(
        f"unknown sweep parameter {name!r}; expected one of {', '.join(SWEEP_PARAMS)}"
    )


@dataclass(frozen=True)
class SweepRow:
    value: float
    gamma2: complex
    gamma3_effective: complex
    gamma3_oracle: float | None
    gamma3_closed_form: float | None
    expectation_with: float
    expectation_without: float
    delta: float
    decision: bool


def sweep(
    config: ProtocolConfig,
    param: str,
    values: list[float],
    max_workers: int | None = None,
) -> tuple[SweepRow, ...]:
    """Run the protocol once per value of one parameter.

    Configs are derived and checked up front; runs fan out across worker
    threads and rows come back in input order.
    """
    if not values:
        raise ConfigError("sweep needs at least one value")
    configs = [apply_sweep_param(config, param, v) for v in values]
    with ThreadPoolExecutor(max_workers=max_workers) as ex:
        reports = list(ex.map(run, configs))
    return tuple(
        SweepRow(
            value=float(v),
            gamma2=r.selected_gamma2,
            gamma3_effective=r.selected_gamma3,
            gamma3_oracle=r.gamma3_oracle,
            gamma3_closed_form=r.gamma3_closed_form,
            expectation_with=r.expectation_with,
            expectation_without=r.expectation_without,
            delta=r.delta,
            decision=r.decision_detected,
        )
        for v, r in zip(values, reports)
    )


@dataclass(frozen=True)
class NonlocalityRow:
    beta2: float
    gamma3: float
    bob_expectation: float
    alice_marginal_tv: float
    marginal: np.ndarray


@dataclass(frozen=True)
class NonlocalityResult:
    """Per-carrier-width rows plus the headline separations.

    max_pairwise_tv bounds how much the near-side marginal moved across the
    whole scan (it should be statistical zero); bob_spread is how far the
    far-side expectation moved (the detectable effect).
    """

    rows: tuple[NonlocalityRow, ...]
    max_pairwise_tv: float
    bob_spread: float
    gamma3_increasing_in_beta2: bool
    grid2: Grid


def total_variation(p: np.ndarray, q: np.ndarray, spacing: float) -> float:
    """Total variation distance between densities sampled on one grid."""
    return 0.5 * float(np.sum(np.abs(p - q)) * spacing)


def nonlocality_scan(
    config: ProtocolConfig,
    betas: list[float],
    max_workers: int | None = None,
) -> NonlocalityResult:
    """Vary the far carrier's width and confirm the near marginal never moves.

    Each width gets a full run; the near-particle position marginal of the
    final state is compared pairwise in total variation, while the far-side
    expectation and the far overlap track the width.
    """
    betas = [float(b) for b in betas]
    if not betas:
        raise ConfigError("nonlocality scan needs at least one beta2 value")
    if any(b <= 0 for b in betas):
        raise ConfigError(f"beta2 values must be positive, got {betas}")
    if not config.alice_switch:
        raise ConfigError(
            "the nonlocality scan varies the carrier under an active switch;"
            " set alice_switch true"
        )
    configs = [replace(config, beta2=b) for b in betas]
    with ThreadPoolExecutor(max_workers=max_workers) as ex:
        results = list(ex.map(run_full, configs))

    grid2 = results[0][1].grids[1]
    marginals = []
    for _, art in results:
        if not grids_equal(art.grids[1], grid2):
            raise GridMismatch(
                "nonlocality scan produced different middle grids across widths"
            )
        marginals.append(marginal_density(art.final_state, 1))

    dq = grid2.spacing
    rows = tuple(
        NonlocalityRow(
            beta2=b,
            gamma3=float(rep.selected_gamma3.real),
            bob_expectation=rep.expectation_grid,
            alice_marginal_tv=total_variation(marg, marginals[0], dq),
            marginal=marg,
        )
        for b, (rep, _), marg in zip(betas, results, marginals)
    )
    max_tv = 0.0
    for i in range(len(marginals)):
        for j in range(i + 1, len(marginals)):
            max_tv = max(max_tv, total_variation(marginals[i], marginals[j], dq))
    bobs = [row.bob_expectation for row in rows]
    by_beta = sorted(rows, key=lambda row: row.beta2)
    increasing = all(
        later.gamma3 > earlier.gamma3 for earlier, later in zip(by_beta, by_beta[1:])
    )
    return NonlocalityResult(
        rows=rows,
        max_pairwise_tv=max_tv,
        bob_spread=max(bobs) - min(bobs),
        gamma3_increasing_in_beta2=increasing,
        grid2=grid2,
    )
