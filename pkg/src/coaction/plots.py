"""Figure rendering for reports: learned fronts and training curves."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import MetricsReport, SolutionSet, nondominated_filter
from .problems import get_problem


def save_front_figure(solutions: SolutionSet, report: MetricsReport, path: str):
    """Scatter of the learned front (2D or 3D) with metric annotations."""
    fs = solutions.fs
    front = nondominated_filter(fs)
    m = fs.shape[1]
    fig = plt.figure(figsize=(5, 4.2))
    if m == 2:
        ax = fig.add_subplot(111)
        problem = get_problem(solutions.task_id)
        if problem.has_analytic_front:
            ref = problem.true_front(200)
            order = np.argsort(ref[:, 0])
            ax.plot(ref[order, 0], ref[order, 1], color="0.6", lw=1,
                    label="analytic front")
        ax.scatter(fs[:, 0], fs[:, 1], s=10, alpha=0.4, label="grid solutions")
        ax.scatter(front[:, 0], front[:, 1], s=14, color="tab:orange",
                   label="non-dominated")
        ax.set_xlabel("f1 (normalized)")
        ax.set_ylabel("f2 (normalized)")
        ax.legend(fontsize=8)
    else:
        ax = fig.add_subplot(111, projection="3d")
        ax.scatter(fs[:, 0], fs[:, 1], fs[:, 2], s=8, alpha=0.4)
        ax.scatter(front[:, 0], front[:, 1], front[:, 2], s=12,
                   color="tab:orange")
        ax.set_xlabel("f1")
        ax.set_ylabel("f2")
        ax.set_zlabel("f3")
    ax.set_title(f"{solutions.task_id}  HV={report.hv:.3f}  "
                 f"Range={report.range:.3f}  Sparsity={report.sparsity:.3f}",
                 fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_loss_figure(loss: np.ndarray, path: str, window: int = 50):
    """Per-iteration loss with a running mean overlay."""
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    ax.plot(loss, lw=0.4, alpha=0.5, label="loss")
    if len(loss) >= window:
        kernel = np.ones(window) / window
        smooth = np.convolve(loss, kernel, mode="valid")
        ax.plot(np.arange(window - 1, len(loss)), smooth, lw=1.2,
                label=f"mean({window})")
    ax.set_xlabel("iteration")
    ax.set_ylabel("surrogate loss")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
