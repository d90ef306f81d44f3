"""Optional figure rendering for report sections.

The CLI renders these PNGs next to the JSON/CSV output when --figures is
passed.  Everything draws through the Agg backend, so a display is never
required.  Figures are a convenience view of the delimited data, not an
interface other tooling should parse.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

_FIG_SIZE = (7.0, 4.5)
_DPI = 120


def _new_axes(title: str):
    fig, ax = plt.subplots(figsize=_FIG_SIZE, dpi=_DPI)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return fig, ax


def plot_trace(trace, path) -> None:
    """Computed-vs-reference curves for one theorem trace."""
    params = [s.param for s in trace.samples]
    fig, ax = _new_axes(f"{trace.name} ({trace.verdict})")
    ax.plot(params, [s.computed for s in trace.samples], "o-", label="computed",
            markersize=3)
    ax.plot(params, [s.reference for s in trace.samples], "--", label="reference")
    ax.set_xlabel("n" if trace.name.startswith("replication") else "parameter")
    ax.set_ylabel("value")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_gain_histogram(gains, path, title: str = "deviation gains") -> None:
    """Distribution of scan gains, with the zero line marked."""
    fig, ax = _new_axes(title)
    ax.hist(list(gains), bins=40, color="#4878a8", edgecolor="white")
    ax.axvline(0.0, color="black", linewidth=1)
    ax.set_xlabel("gain over truthful utility")
    ax.set_ylabel("searches")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_independence_matrix(verdicts: dict, path) -> None:
    """Pass/fail grid, mechanisms by axioms."""
    names = list(verdicts)
    axioms = list(next(iter(verdicts.values())).keys())
    grid = [[0.0 if verdicts[n][a] == "pass" else 1.0 for a in axioms] for n in names]
    fig, ax = plt.subplots(figsize=(1.2 * len(axioms), 0.6 * len(names) + 1.2), dpi=_DPI)
    ax.imshow(grid, cmap="RdYlGn_r", vmin=0.0, vmax=1.0, aspect="auto")
    ax.set_xticks(range(len(axioms)), axioms, rotation=45, ha="right", fontsize=8)
    ax.set_yticks(range(len(names)), names, fontsize=8)
    for i in range(len(names)):
        for j in range(len(axioms)):
            ax.text(j, i, "fail" if grid[i][j] else "pass", ha="center", va="center",
                    fontsize=7)
    ax.set_title("axiom verdicts")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
