"""Matplotlib rendering of the report figures.

Imported lazily by the CLI, so the numerical core never pulls in a
plotting stack unless figures are requested.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

RC = {
    "font.size": 10,
    "axes.labelsize": 11,
    "legend.fontsize": 9,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}

T_LABEL = r"$t$ (units of $1/\omega$)"


def _figure(width=6.0, height=None):
    golden = (5**0.5 - 1) / 2
    fig, ax = plt.subplots(figsize=(width, height or width * golden))
    return fig, ax


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_series(series, path, ylabel, reference=None):
    """One line per finite-J series, the reference curve dashed."""
    with plt.rc_context(RC):
        fig, ax = _figure()
        for s in series:
            ax.plot(s.times, s.values, lw=1.2, label=s.label)
        if reference is not None:
            ax.plot(reference.times, reference.values, "k--", lw=1.2, label=reference.label)
        ax.set_xlabel(T_LABEL)
        ax.set_ylabel(ylabel)
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_occupation(series, reference, path):
    return plot_series(series, path, r"$\langle c^\dagger c\rangle$", reference)


def plot_entropy(series, path):
    return plot_series(series, path, r"$S_c$ (nats)")


def plot_phase_scan(lams, peak, peak_tl, order, lambda_c, path):
    with plt.rc_context(RC):
        fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6, 5.5))
        ax1.plot(lams, peak, "o-", label="finite J")
        ax1.plot(lams, peak_tl, "k--", label="TL")
        ax1.set_ylabel(r"peak $\langle c^\dagger c\rangle$")
        ax1.legend(frameon=False)
        ax2.plot(lams, order, "s-")
        ax2.set_ylabel(r"$\langle a^\dagger a\rangle / J$")
        ax2.set_xlabel(r"$\lambda$")
        for ax in (ax1, ax2):
            ax.axvline(lambda_c, color="0.6", lw=0.8)
        return _save(fig, path)


def plot_trajectory(traj, reference, path):
    with plt.rc_context(RC):
        fig, ax = _figure()
        ax.plot(traj.times, traj["q3"], lw=1.2, label="RK4")
        if reference is not None:
            ax.plot(traj.times, reference, "k--", lw=1.0, label="forced oscillator")
        ax.set_xlabel(T_LABEL)
        ax.set_ylabel(r"$q_3$")
        ax.legend(frameon=False)
        return _save(fig, path)
