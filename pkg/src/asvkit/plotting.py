"""Figure rendering for the CLI report path.

Every function writes one PNG next to the CSV it illustrates and returns its
path. The Agg backend is forced and PNG metadata stripped so reruns produce
identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

DPI = 120
RC = {
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
    "legend.fontsize": 8,
    "figure.figsize": (6.0, 4.0),
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=DPI, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    return path


def plot_trajectory(traj, waypoints, path) -> Path:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        # north up, east right
        ax.plot(traj.states[:, 1], traj.states[:, 0], lw=1.2, label="track")
        ax.plot([w.y for w in waypoints], [w.x for w in waypoints], "rx", label="waypoints")
        for w in waypoints:
            ax.add_patch(plt.Circle((w.y, w.x), w.capture_radius, fill=False, ls=":", color="r"))
        ax.set_xlabel("east y [m]")
        ax.set_ylabel("north x [m]")
        ax.set_aspect("equal", adjustable="datalim")
        ax.legend(loc="best")
        return _save(fig, path)


def plot_heading(traj, path) -> Path:
    with plt.rc_context(RC):
        fig, (a1, a2) = plt.subplots(2, 1, sharex=True)
        a1.plot(traj.t, np.degrees(traj.states[:, 2]), label="heading")
        if traj.psi_ref is not None:
            a1.plot(traj.t, np.degrees(traj.psi_ref), "--", label="LOS reference")
        a1.set_ylabel("deg")
        a1.legend(loc="best")
        a2.plot(traj.t, traj.forces[:, 2], lw=0.8)
        a2.set_ylabel("yaw moment [N m]")
        a2.set_xlabel("t [s]")
        return _save(fig, path)


def plot_step(responses: dict, path) -> Path:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        for label, resp in responses.items():
            y = np.clip(resp.y, -10, 10)
            ax.plot(resp.t, y, label=label)
        ax.axhline(1.0, color="k", lw=0.5)
        ax.set_xlabel("t [s]")
        ax.set_ylabel("y")
        ax.set_ylim(-1.0, 3.0)
        ax.legend(loc="best")
        return _save(fig, path)


def plot_root_locus(locus, open_loop, path) -> Path:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        re = np.concatenate([r.real for _, r in locus])
        im = np.concatenate([r.imag for _, r in locus])
        ax.plot(re, im, ".", ms=2)
        p = np.roots(open_loop.den)
        z = np.roots(open_loop.num) if len(open_loop.num) > 1 else np.array([])
        ax.plot(p.real, p.imag, "kx", label="open-loop poles")
        if z.size:
            ax.plot(z.real, z.imag, "o", mfc="none", mec="k", label="zeros")
        ax.axvline(0.0, color="k", lw=0.6)
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        ax.legend(loc="best")
        return _save(fig, path)


def plot_decay(records, analyses, path) -> Path:
    """Free-decay responses reconstructed from each test row, one panel per test axis."""
    from .swath import free_response

    labels = list(dict.fromkeys(r.label for r in records))
    with plt.rc_context(RC):
        fig, axes = plt.subplots(len(labels), 1, sharex=True, squeeze=False,
                                 figsize=(6.0, 2.0 * len(labels)))
        t = np.linspace(0.0, 50.0, 2001)
        for ax, label in zip(axes[:, 0], labels):
            for rec, an in zip(records, analyses):
                if rec.label == label:
                    ax.plot(t, free_response(an, rec.b1, t), lw=0.8, label=f'{rec.freeboard:g}" freeboard')
            ax.set_ylabel(f"{label} [in]")
            ax.legend(loc="upper right")
        axes[-1, 0].set_xlabel("t [s]")
        return _save(fig, path)
