import math

import numpy as np
from scipy import stats


def log_slope(ns, p_gs):
    """
    Least-squares slope of ln(p_g) against N.

    Points with p_g = 0 are dropped. Returns None when fewer than two distinct
    N values remain, since the fit is then undefined.
    """
    points = [(float(n), math.log(p)) for n, p in zip(ns, p_gs) if p > 0]
    if len({n for n, _ in points}) < 2:
        return None
    xs, ys = zip(*points)
    slope, _, _, _, _ = stats.linregress(xs, ys)
    return float(slope)


def get_trace_summary(trace):
    """
    Compact statistics of an evolution trace (columns t, norm, P_g, subspace_leak).
    """
    if trace.empty:
        return {"steps": 0}
    leak = trace["subspace_leak"].dropna()
    return {
        "steps": len(trace),
        "t_final": round(float(trace["t"].iloc[-1]), 6),
        "P_g_final": float(trace["P_g"].iloc[-1]),
        "max_norm_drift": float(np.max(np.abs(trace["norm"].values - 1.0))),
        "max_subspace_leak": float(leak.max()) if not leak.empty else None,
    }


def format_design_report(report):
    """
    Converts a design report dictionary into console text.
    """
    counts = {}
    for c in report["candidates"]:
        counts[c["verdict"]] = counts.get(c["verdict"], 0) + 1
    target = report["target"] if report["target"] is not None else "given by contact map"
    text = (f"Target {target} (N={report['n']}), "
            f"n_h={report['n_h']}, lambda={report['lambda']}, solver={report['solver']}\n")
    text += (f"- Oracle: min E_HP={report['oracle_min_ehp']}, "
             f"degeneracy={report['oracle_degeneracy']}\n")
    if report.get("gap") is not None:
        text += f"- Gap to first excited level: {report['gap']}\n"
    text += f"- Candidates: {len(report['candidates'])}\n"
    for verdict, count in sorted(counts.items()):
        text += f"  * {verdict}: {count}\n"
    if report.get("flagged"):
        text += f"- Flagged above the oracle minimum: {len(report['flagged'])}\n"
    if report.get("reference"):
        ref = report["reference"]
        text += f"- Given sequence {ref['sequence']}: E_HP={ref['ehp']}, {ref['verdict']}\n"
    return text


def format_noise_frame(frame, slope=None):
    text = ""
    for row in frame.itertuples(index=False):
        text += (f"- {row.system_id}: N={row.n}, x={row.x}, J_cs={row.j_cs} -> "
                 f"P_g={row.p_g:.4f} +/- {row.ci95:.4f} ({row.successes}/{row.samples})\n")
    if slope is not None:
        text += f"- Fitted slope of ln(P_g) vs N: {slope:.4f}\n"
    return text


def format_chi_frame(frame):
    text = ""
    for row in frame.itertuples(index=False):
        chi = "n/a" if math.isnan(row.chi) else f"{row.chi:.4f}"
        text += f"- t_f={row.t_f}, eps={row.eps}: P_g={row.P_g:.8f}, chi={chi}\n"
    return text


def format_p_g_sweep(frame):
    text = ""
    for row in frame.itertuples(index=False):
        text += f"- {row.system_id}: t_f={row.t_f:g}, eps={row.eps:g} -> P_g={row.P_g:.6f}\n"
    return text
