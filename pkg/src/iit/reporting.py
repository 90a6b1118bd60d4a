"""Run outputs: JSON report envelope, delimited tables, figures, summaries.

The JSON envelope is {schema_version, manifest, config, report}; only the
manifest block carries timestamps (and the seed), so the config and report
blocks are byte-identical across reruns of the same setup. CSV columns are
pinned per schema version. Complex quantities keep both components in JSON;
the CSV tables carry their real parts (every shipped scenario is real, and
the JSON report stays the authoritative record).
"""
from __future__ import annotations

import os

import numpy as np

from .analytics import GaussianScenario
from .config import (
    SCHEMA_VERSION,
    atomic_write_json,
    atomic_write_text,
    complex_to_json,
    config_to_dict,
    make_manifest,
)
from .protocol import (
    NonlocalityResult,
    ProtocolConfig,
    ProtocolReport,
    RunArtifacts,
    SweepRow,
)

SWEEP_HEADER = (
    "param,gamma2,gamma3_effective,gamma3_oracle,gamma3_closed_form,"
    "expectation_with,expectation_without,delta,decision"
)
NONLOCALITY_HEADER = "beta2,gamma3,bob_expectation,alice_marginal_tv"


def _csv_num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, complex):
        x = x.real
    return repr(float(x))


def _yes_no(flag: bool) -> str:
    return "yes" if flag else "no"


def scenario_to_dict(sc: GaussianScenario | None) -> dict | None:
    if sc is None:
        return None
    return {
        "m_plus": sc.m_plus,
        "m_minus": sc.m_minus,
        "sigma2": sc.sigma2,
        "beta2": sc.beta2,
        "g23": sc.g23,
        "T": sc.T,
        "convention": sc.convention,
        "big_g": sc.big_g,
    }


def report_to_dict(report: ProtocolReport) -> dict:
    """Deterministic JSON form of a run report (no timestamps, fixed order)."""
    return {
        "alice_switch": report.alice_switch,
        "profile": report.profile,
        "gamma_convention": report.gamma_convention,
        "gaussian_convention": report.gaussian_convention,
        "transport": {
            "d12": report.d12,
            "c23": report.c23,
            "g_configured": report.g_configured,
            "r12": report.r12,
            "r23": report.r23,
        },
        "overlaps": {
            "gamma2_raw": complex_to_json(report.gamma2_raw),
            "gamma2_normalized": complex_to_json(report.gamma2_normalized),
            "gamma2_effective": complex_to_json(report.selected_gamma2),
            "gamma3_raw": complex_to_json(report.gamma3_raw),
            "gamma3_normalized": complex_to_json(report.gamma3_normalized),
            "gamma3_effective": complex_to_json(report.selected_gamma3),
            "gamma3_oracle": report.gamma3_oracle,
            "gamma3_closed_form": report.gamma3_closed_form,
            "closed_form_exceeds_unit": report.closed_form_exceeds_unit,
            "oracle_closed_ratio": report.oracle_closed_ratio,
        },
        "expectations": {
            "expectation_with": report.expectation_with,
            "expectation_without": report.expectation_without,
            "delta": report.delta,
            "expectation_grid": report.expectation_grid,
            "expectation_exact_state": report.expectation_exact_state,
            "consistency_gap": report.consistency_gap,
        },
        "decision": {
            "decision_detected": report.decision_detected,
            "detection_threshold": report.detection_threshold,
        },
        "recovery": {
            "gamma3_recovered": report.gamma3_recovered,
            "g_recovered": report.g_recovered,
            "scenario": scenario_to_dict(report.scenario),
        },
        "fidelity": {
            "overlap_bipartite": complex_to_json(report.overlap_bipartite),
            "fidelity_bipartite": report.fidelity_bipartite,
            "overlap_tripartite": None
            if report.overlap_tripartite is None
            else complex_to_json(report.overlap_tripartite),
            "fidelity_tripartite": report.fidelity_tripartite,
        },
        "norm_audit": {
            "phi_plus": report.norm_phi_plus,
            "phi_minus": report.norm_phi_minus,
            "chi_plus": report.norm_chi_plus,
            "chi_minus": report.norm_chi_minus,
            "q1_integral_deviation": None
            if report.q1_integral_deviation is None
            else list(report.q1_integral_deviation),
        },
        "grids": {
            "descriptors": list(report.grid_descriptors),
            "layout": list(report.grid_layout),
        },
        "notes": list(report.notes),
    }


def write_run_report(
    path: str,
    config: ProtocolConfig,
    report: ProtocolReport,
    seed: int | None = None,
) -> str:
    envelope = {
        "schema_version": SCHEMA_VERSION,
        "manifest": make_manifest(report.profile, seed),
        "config": config_to_dict(config),
        "report": report_to_dict(report),
    }
    atomic_write_json(path, envelope)
    return path


def write_sweep_csv(path: str, rows: tuple[SweepRow, ...]) -> str:
    lines = [SWEEP_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    _csv_num(r.value),
                    _csv_num(r.gamma2),
                    _csv_num(r.gamma3_effective),
                    _csv_num(r.gamma3_oracle),
                    _csv_num(r.gamma3_closed_form),
                    _csv_num(r.expectation_with),
                    _csv_num(r.expectation_without),
                    _csv_num(r.delta),
                    _yes_no(r.decision),
                ]
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")
    return path


def write_nonlocality_csv(path: str, result: NonlocalityResult) -> str:
    lines = [NONLOCALITY_HEADER]
    for r in result.rows:
        lines.append(
            ",".join(
                [
                    _csv_num(r.beta2),
                    _csv_num(r.gamma3),
                    _csv_num(r.bob_expectation),
                    _csv_num(r.alice_marginal_tv),
                ]
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")
    return path


def _fmt_c(z: complex) -> str:
    z = complex(z)
    if abs(z.imag) < 1e-12:
        return f"{z.real:.10g}"
    return f"{z.real:.10g}{z.imag:+.10g}i"


def _fmt_opt(x, spec: str = ".10g") -> str:
    return "n/a" if x is None else format(x, spec)


def run_summary_text(report: ProtocolReport) -> str:
    """One-screen summary table for stdout."""
    lines = [
        "== run summary ==",
        f"profile              {report.profile}",
        f"alice_switch         {_yes_no(report.alice_switch)}",
        f"gamma convention     {report.gamma_convention}"
        f" (gaussians: {report.gaussian_convention})",
        f"d12, c23, G          {report.d12:.10g}, {report.c23:.10g},"
        f" {report.g_configured:.10g}",
        f"gamma2               {_fmt_c(report.selected_gamma2)}"
        f" (raw {_fmt_c(report.gamma2_raw)})",
        f"gamma3               {_fmt_c(report.selected_gamma3)}"
        f" (raw {_fmt_c(report.gamma3_raw)})",
        f"gamma3 oracle        {_fmt_opt(report.gamma3_oracle)}",
        f"gamma3 closed form   {_fmt_opt(report.gamma3_closed_form)}"
        + (" [exceeds 1]" if report.closed_form_exceeds_unit else ""),
        f"oracle/closed ratio  {_fmt_opt(report.oracle_closed_ratio)}",
        f"expectation_with     {report.expectation_with:.10g}",
        f"expectation_without  {report.expectation_without:.10g}",
        f"delta                {report.delta:.10g}",
        f"grid expectation     {report.expectation_grid:.10g}"
        f" (formula gap {report.consistency_gap:.3e})",
        f"exact-state value    {report.expectation_exact_state:.10g}",
        f"decision             {_yes_no(report.decision_detected)}"
        f" (threshold {report.detection_threshold:g})",
        f"recovered gamma3     {_fmt_opt(report.gamma3_recovered)}",
        f"recovered G          {_fmt_opt(report.g_recovered)}"
        f" (configured {report.g_configured:.10g}, oracle mode)",
        f"fidelity bipartite   {report.fidelity_bipartite:.10g}",
        f"fidelity tripartite  {_fmt_opt(report.fidelity_tripartite)}",
        f"norm phi+/phi-       {report.norm_phi_plus:.10g},"
        f" {report.norm_phi_minus:.10g}",
        f"norm chi+/chi-       {_fmt_opt(report.norm_chi_plus)},"
        f" {_fmt_opt(report.norm_chi_minus)}",
    ]
    if report.q1_integral_deviation is not None:
        dev_p, dev_m = report.q1_integral_deviation
        lines.append(f"q1 integral dev      {dev_p:.3e}, {dev_m:.3e}")
    lines.append("layout:")
    lines.extend(f"  {line}" for line in report.grid_layout)
    if report.notes:
        lines.append("notes:")
        lines.extend(f"  {note}" for note in report.notes)
    return "\n".join(lines)


def sweep_summary_text(param: str, rows: tuple[SweepRow, ...]) -> str:
    lines = [
        f"== sweep over {param} ({len(rows)} values) ==",
        f"{param:>12}  {'gamma2':>12}  {'gamma3':>12}  {'delta':>12}  decision",
    ]
    for r in rows:
        lines.append(
            f"{r.value:>12.6g}  {r.gamma2.real:>12.6g}"
            f"  {r.gamma3_effective.real:>12.6g}  {r.delta:>12.6g}"
            f"  {_yes_no(r.decision)}"
        )
    return "\n".join(lines)


def nonlocality_summary_text(result: NonlocalityResult) -> str:
    lines = [
        "== nonlocality scan ==",
        f"{'beta2':>10}  {'gamma3':>12}  {'bob_expectation':>16}  {'marginal_tv':>12}",
    ]
    for r in result.rows:
        lines.append(
            f"{r.beta2:>10.6g}  {r.gamma3:>12.6g}  {r.bob_expectation:>16.10g}"
            f"  {r.alice_marginal_tv:>12.3e}"
        )
    lines.append(f"max pairwise TV distance of the near marginal: {result.max_pairwise_tv:.3e}")
    lines.append(f"far expectation spread: {result.bob_spread:.6g}")
    lines.append(
        "far overlap strictly increasing in beta2: "
        + _yes_no(result.gamma3_increasing_in_beta2)
    )
    return "\n".join(lines)


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_run_figure(
    out_dir: str, report: ProtocolReport, artifacts: RunArtifacts
) -> str:
    """Branch densities on all three axes, with the headline numbers."""
    plt = _plt()
    g1, g2, g3 = artifacts.grids
    fig, axes = plt.subplots(1, 3, figsize=(11.5, 3.6))

    ax = axes[0]
    ax.plot(g1.points(), np.abs(artifacts.psi_plus.amplitudes) ** 2, label="branch +")
    ax.plot(g1.points(), np.abs(artifacts.psi_minus.amplitudes) ** 2, label="branch -")
    ax.set_xlabel("q1")
    ax.set_ylabel("density")
    ax.set_title("pointer branches")
    ax.legend(fontsize=8)

    ax = axes[1]
    ax.plot(
        g2.points(),
        np.abs(artifacts.phi0.amplitudes) ** 2,
        color="gray",
        linestyle="--",
        label="carrier",
    )
    ax.plot(
        g2.points(), np.abs(artifacts.phi_hat_plus.amplitudes) ** 2, label="eff +"
    )
    ax.plot(
        g2.points(), np.abs(artifacts.phi_hat_minus.amplitudes) ** 2, label="eff -"
    )
    ax.set_xlabel("q2")
    ax.set_title(f"middle particle, gamma2 = {_fmt_c(report.selected_gamma2)}")
    ax.legend(fontsize=8)

    ax = axes[2]
    ax.plot(
        g3.points(),
        np.abs(artifacts.chi0.amplitudes) ** 2,
        color="gray",
        linestyle="--",
        label="carrier",
    )
    if artifacts.chi_hat_plus is not None:
        ax.plot(
            g3.points(), np.abs(artifacts.chi_hat_plus.amplitudes) ** 2, label="eff +"
        )
        ax.plot(
            g3.points(),
            np.abs(artifacts.chi_hat_minus.amplitudes) ** 2,
            label="eff -",
        )
        ax.set_title(f"far particle, gamma3 = {_fmt_c(report.selected_gamma3)}")
    else:
        ax.set_title("far particle (no coupling)")
    ax.set_xlabel("q3")
    ax.legend(fontsize=8)

    fig.suptitle(
        f"delta = {report.delta:.6g}, decision {_yes_no(report.decision_detected)},"
        f" formula gap {report.consistency_gap:.1e}",
        fontsize=10,
    )
    fig.tight_layout(rect=(0, 0, 1, 0.93))
    path = os.path.join(out_dir, "run_overview.png")
    os.makedirs(out_dir, exist_ok=True)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_sweep_figure(out_dir: str, param: str, rows: tuple[SweepRow, ...]) -> str:
    plt = _plt()
    x = [r.value for r in rows]
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9.5, 3.6))

    ax0.plot(x, [r.gamma2.real for r in rows], "o-", label="gamma2")
    ax0.plot(x, [r.gamma3_effective.real for r in rows], "s-", label="gamma3")
    oracle_pts = [(v, r.gamma3_oracle) for v, r in zip(x, rows) if r.gamma3_oracle is not None]
    if oracle_pts:
        ax0.plot(*zip(*oracle_pts), "x--", label="gamma3 oracle")
    closed_pts = [
        (v, r.gamma3_closed_form)
        for v, r in zip(x, rows)
        if r.gamma3_closed_form is not None
    ]
    if closed_pts:
        ax0.plot(*zip(*closed_pts), "+:", label="gamma3 closed form")
    ax0.set_xlabel(param)
    ax0.set_ylabel("branch overlap")
    ax0.legend(fontsize=8)

    ax1.plot(x, [r.expectation_with for r in rows], "o-", label="with")
    ax1.plot(x, [r.expectation_without for r in rows], "s-", label="without")
    ax1.set_xlabel(param)
    ax1.set_ylabel("expectation")
    ax1.legend(fontsize=8, loc="upper left")
    twin = ax1.twinx()
    twin.plot(x, [r.delta for r in rows], "d--", color="tab:red", label="delta")
    twin.set_ylabel("delta")
    twin.legend(fontsize=8, loc="lower right")

    fig.tight_layout()
    path = os.path.join(out_dir, "sweep_curves.png")
    os.makedirs(out_dir, exist_ok=True)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_nonlocality_figure(out_dir: str, result: NonlocalityResult) -> str:
    plt = _plt()
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9.5, 3.6))

    q2 = result.grid2.points()
    for row in result.rows:
        ax0.plot(q2, row.marginal, label=f"beta2 = {row.beta2:g}")
    ax0.set_xlabel("q2")
    ax0.set_ylabel("near-side marginal density")
    ax0.set_title(f"max pairwise TV = {result.max_pairwise_tv:.2e}")
    ax0.legend(fontsize=8)

    betas = [r.beta2 for r in result.rows]
    ax1.plot(betas, [r.bob_expectation for r in result.rows], "o-", color="tab:blue")
    ax1.set_xlabel("beta2")
    ax1.set_ylabel("far-side expectation", color="tab:blue")
    twin = ax1.twinx()
    twin.plot(betas, [r.gamma3 for r in result.rows], "s--", color="tab:orange")
    twin.set_ylabel("gamma3", color="tab:orange")
    ax1.set_title(f"expectation spread = {result.bob_spread:.4g}")

    fig.tight_layout()
    path = os.path.join(out_dir, "nonlocality.png")
    os.makedirs(out_dir, exist_ok=True)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
