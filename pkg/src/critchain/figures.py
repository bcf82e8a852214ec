"""Default grids for the figure commands and the SVG views derived from their tables."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import svg
from .config import Axis, SweepConfig
from .model import Regime
from .sweep import SweepResult

FIG3_PHASES = tuple(f * math.pi for f in (0.0, 0.25, 0.4, 0.5, 0.6, 0.8))
FIG2_COUPLINGS = (0.0, 0.2, 0.5, 0.88, 1.2)
KAPPA_SLICES = (0.1, 0.3, 0.5)
ETA_LO, ETA_HI = 0.3, 30.0


@dataclass(frozen=True)
class PlotSpec:
    suffix: str
    kind: str  # "line" or "heat"
    x: str
    y: str
    group: str | None = None
    z: str | None = None
    logx: bool = False
    logy: bool = False
    title: str = ""


@dataclass(frozen=True)
class Table:
    config: SweepConfig
    plots: tuple


def _gc(cfg: SweepConfig) -> float:
    p = cfg.params
    return math.sqrt(math.pi * p["omega0"] / (4.0 * p["thop"]))


def _phases(base: SweepConfig, phi_given: bool, default) -> tuple:
    return base.phi if phi_given else tuple(default)


def fig2(base: SweepConfig, g_given: bool = False, **_) -> list[Table]:
    gs = (base.params["g"],) if g_given else FIG2_COUPLINGS
    cfg = base.with_(
        quantity="spectrum",
        regime=Regime.LOSSLESS,
        axes=(Axis.explicit("g", gs), Axis.range("s", -math.pi / 2, math.pi / 2, 201)),
        name="fig2",
    )
    plots = (
        PlotSpec("a", "line", "s", "E0_full", group="g", title="ground energy, full cavity Hamiltonian"),
        PlotSpec("b", "line", "s", "E0_trunc", group="g", title="ground energy, second-order Hamiltonian"),
    )
    return [Table(cfg, plots)]


def fig3(base: SweepConfig, phi_given: bool = False, **_) -> list[Table]:
    cfg = base.with_(
        quantity="fisher",
        regime=Regime.LOSSLESS,
        axes=(Axis.range("g", 0.05, 0.99 * _gc(base), 201),),
        phi=_phases(base, phi_given, FIG3_PHASES),
        name="fig3",
    )
    return [Table(cfg, (PlotSpec("", "line", "g", "ratio", group="phi", title="F/I, lossless"),))]


def fig4(base: SweepConfig, **_) -> list[Table]:
    gc = _gc(base)
    cfg = base.with_(
        quantity="qfi",
        regime=Regime.CAVITY_LOSS,
        axes=(Axis.range("kappa_ph", 0.01, 1.0, 101), Axis.range("g", 0.0, 1.1 * gc, 101)),
        name="fig4",
    )
    plots = (
        PlotSpec("a", "heat", "g", "kappa_ph", z="log10_qfi", title="log10 QFI, cavity loss"),
        PlotSpec("b", "line", "g", "log10_qfi", group="kappa_ph", title="log10 QFI slices"),
    )
    return [Table(cfg, plots)]


def fig5(base: SweepConfig, phi_given: bool = False, **_) -> list[Table]:
    cfg = base.with_(
        quantity="fisher",
        regime=Regime.CAVITY_LOSS,
        axes=(Axis.range("g", 0.05, _gc(base), 201),),
        phi=_phases(base, phi_given, FIG3_PHASES),
        name="fig5",
    )
    return [Table(cfg, (PlotSpec("", "line", "g", "ratio", group="phi", title="F/I, cavity loss"),))]


def fig6(base: SweepConfig, phi_given: bool = False, **_) -> list[Table]:
    cfg = base.with_(
        quantity="fisher",
        regime=Regime.CAVITY_LOSS,
        axes=(Axis.range("kappa_ph", 0.005, 1.0, 201),),
        phi=_phases(base, phi_given, (0.0,)),
        name="fig6",
    )
    return [Table(cfg, (PlotSpec("", "line", "kappa_ph", "ratio", group="phi", title="F/I vs photon decay"),))]


def fig7(base: SweepConfig, **_) -> list[Table]:
    chain = base.with_(regime=Regime.CHAIN_LOSS)
    eta_fine = Axis.range("eta", ETA_LO, ETA_HI, 201, "log")
    a = chain.with_(
        quantity="qfi",
        axes=(Axis.range("kappa_ph", 0.05, 1.0, 101), Axis.range("eta", ETA_LO, ETA_HI, 101, "log")),
        name="fig7a",
    )
    b = chain.with_(quantity="qfi", axes=(Axis.explicit("kappa_ph", KAPPA_SLICES), eta_fine), name="fig7b")
    c = chain.with_(quantity="current", axes=(eta_fine,), name="fig7c")
    d = chain.with_(
        quantity="qfi",
        axes=(Axis.explicit("kappa_ph", KAPPA_SLICES), Axis.range("sites", 1e2, 1e6, 201, "log")),
        name="fig7d",
    )
    return [
        Table(a, (PlotSpec("", "heat", "eta", "kappa_ph", z="qfi", logx=True, title="QFI, chain loss"),)),
        Table(b, (PlotSpec("", "line", "eta", "qfi", group="kappa_ph", logx=True, title="QFI vs eta"),)),
        Table(c, (PlotSpec("", "line", "eta", "abs_j_bar", logx=True, title="steady current magnitude"),)),
        Table(d, (PlotSpec("", "line", "sites", "qfi", group="kappa_ph", logx=True, logy=True, title="QFI vs L"),)),
    ]


def fig8(base: SweepConfig, **_) -> list[Table]:
    chain = base.with_(regime=Regime.CHAIN_LOSS, quantity="fisher")
    a = chain.with_(
        axes=(Axis.range("kappa_ph", 0.05, 1.5, 101), Axis.range("phi", 0.0, math.pi, 101)),
        name="fig8a",
    )
    b = chain.with_(axes=(Axis.range("kappa_ph", 0.01, 1.5, 201),), phi=(0.0,), name="fig8b")
    c = chain.with_(axes=(Axis.range("sites", 1e2, 1e6, 201, "log"),), phi=(0.0,), name="fig8c")
    return [
        Table(a, (PlotSpec("", "heat", "phi", "kappa_ph", z="ratio", title="F/I, chain loss"),)),
        Table(b, (PlotSpec("", "line", "kappa_ph", "ratio", title="F/I vs photon decay"),)),
        Table(c, (PlotSpec("", "line", "sites", "ratio", logx=True, title="F/I vs L"),)),
    ]


FIGURES = {"fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5, "fig6": fig6, "fig7": fig7, "fig8": fig8}


def render_plot(result: SweepResult, spec: PlotSpec) -> str:
    if spec.kind == "heat":
        xs = np.unique(result.column(spec.x))
        ys = np.unique(result.column(spec.y))
        z = np.full((ys.size, xs.size), np.nan)
        xi = np.searchsorted(xs, result.column(spec.x))
        yi = np.searchsorted(ys, result.column(spec.y))
        z[yi, xi] = result.column(spec.z)
        return svg.heatmap(xs, ys, z, title=spec.title, xlabel=spec.x, ylabel=spec.y, logx=spec.logx, logy=spec.logy)
    x = result.column(spec.x)
    y = result.column(spec.y)
    if spec.group is None:
        series = {spec.y: y}
        xv = x
    else:
        groups = result.column(spec.group)
        series = {}
        xv = None
        for gv in dict.fromkeys(groups.tolist()):
            m = groups == gv
            xv = x[m]
            series[f"{spec.group}={gv:.4g}"] = y[m]
    return svg.line_plot(xv, series, title=spec.title, xlabel=spec.x, ylabel=spec.y, logx=spec.logx, logy=spec.logy)


def write_plots(result: SweepResult, table: Table, out_dir: str) -> list[str]:
    paths = []
    for spec in table.plots:
        stem = table.config.name + (f"_{spec.suffix}" if spec.suffix else "")
        path = os.path.join(out_dir, stem + ".svg")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(render_plot(result, spec))
        paths.append(path)
    return paths
