"""
Deterministic SVG plots. Geometry is computed here and formatted to fixed precision; the templates only lay
the pre-formatted numbers out.
"""
from pathlib import Path

import numpy as np

from django_postural_synergies.core.types import MUSCLE_CHANNELS
from django_postural_synergies.exceptions import PipelineError
from django_postural_synergies.mixins import SVG_ARTIFACT, Artifact

TEMPLATE_DIR = "django_postural_synergies/plots"


def fmt(value: float) -> str:
    return f"{value:.2f}"


def polyline(points) -> str:
    return " ".join(f"{fmt(x)},{fmt(y)}" for x, y in points)


class Plot(Artifact):
    artifact_type = SVG_ARTIFACT
    width = 480
    height = 320

    def get_context_data(self):
        return {
            "title": self.name,
            "width": self.width,
            "height": self.height
        }


class SynergyBarsPlot(Plot):
    """One bar panel per synergy vector, bars in channel order."""
    template_name = f"{TEMPLATE_DIR}/synergies.svg"
    panel_height = 140
    bar_width = 20
    bar_step = 28
    bar_area = 90

    def __init__(self, name: str, synergy_set, per_synergy_vaf=None, provenance: dict = None) -> None:
        super().__init__(name, provenance)
        if synergy_set is None:
            raise PipelineError("plot", f"no synergy set for '{name}'")
        self.synergy_set = synergy_set
        self.per_synergy_vaf = per_synergy_vaf

    def get_context_data(self):
        W = self.synergy_set.W
        panels = []
        for index in range(W.shape[1]):
            bars = []
            for row, weight in enumerate(W[:, index]):
                height = weight * self.bar_area
                bars.append({
                    "x": fmt(40 + row * self.bar_step),
                    "y": fmt(20 + self.bar_area - height),
                    "width": fmt(self.bar_width),
                    "height": fmt(height),
                    "label": MUSCLE_CHANNELS[row].muscle.value if row < len(MUSCLE_CHANNELS) else str(row),
                    "label_x": fmt(40 + row * self.bar_step + self.bar_width / 2),
                })
            title = f"W{index + 1}"
            if self.per_synergy_vaf is not None:
                title += f" ({self.per_synergy_vaf[index]:.1f}% VAF)"
            panels.append({"y": index * self.panel_height, "title": title, "bars": bars})
        context = super().get_context_data()
        context.update({
            "width": 40 + W.shape[0] * self.bar_step + 20,
            "height": max(1, W.shape[1]) * self.panel_height,
            "panels": panels,
            "axis_y": fmt(20 + self.bar_area),
        })
        return context


class TuningPlot(Plot):
    """Synergies as rows and directions as columns; each cell traces the coefficient across the bins."""
    template_name = f"{TEMPLATE_DIR}/tuning.svg"
    cell_width = 120
    cell_height = 90

    def __init__(self, name: str, tuning, provenance: dict = None) -> None:
        super().__init__(name, provenance)
        self.tuning = tuning

    def get_context_data(self):
        grids = self.tuning.grids
        peak = grids.max() if grids.size and grids.max() > 0 else 1.0
        bins = len(self.tuning.bins)
        step = (self.cell_width - 20) / max(1, bins - 1)
        cells = []
        for synergy in range(grids.shape[0]):
            for column, direction in enumerate(self.tuning.directions):
                values = grids[synergy, :, column] / peak
                points = [(10 + index * step, self.cell_height - 10 - value * (self.cell_height - 30))
                          for index, value in enumerate(values)]
                cells.append({
                    "x": column * self.cell_width,
                    "y": 20 + synergy * self.cell_height,
                    "label": f"C{synergy + 1} {direction.value}",
                    "points": polyline(points),
                })
        context = super().get_context_data()
        context.update({
            "width": len(self.tuning.directions) * self.cell_width,
            "height": 20 + grids.shape[0] * self.cell_height,
            "cells": cells,
            "bins": " ".join(name.value for name in self.tuning.bins),
        })
        return context


class VafScanPlot(Plot):
    template_name = f"{TEMPLATE_DIR}/vaf_scan.svg"
    margin = 40

    def __init__(self, name: str, vaf_scan: dict, criterion: float, provenance: dict = None) -> None:
        super().__init__(name, provenance)
        if not vaf_scan:
            raise PipelineError("plot", f"empty VAF scan for '{name}'")
        self.vaf_scan = dict(sorted(vaf_scan.items()))
        self.criterion = criterion

    def _y(self, vaf: float) -> float:
        # axis spans 0..100 %, clipped below
        return self.height - self.margin - max(0.0, vaf) / 100.0 * (self.height - 2 * self.margin)

    def get_context_data(self):
        count = len(self.vaf_scan)
        step = (self.width - 2 * self.margin) / max(1, count - 1)
        points = [
            {"x": fmt(self.margin + index * step), "y": fmt(self._y(vaf)), "n": n, "vaf": f"{vaf:.2f}"}
            for index, (n, vaf) in enumerate(self.vaf_scan.items())
        ]
        context = super().get_context_data()
        context.update({
            "points": points,
            "line": " ".join(f"{point['x']},{point['y']}" for point in points),
            "criterion_y": fmt(self._y(self.criterion)),
            "criterion": f"{self.criterion:g}",
            "left": self.margin,
            "right": self.width - self.margin,
            "bottom": self.height - self.margin,
        })
        return context


class CopTracePlot(Plot):
    """COP paths (mm) of a few trials drawn in one square frame centred on their common mean."""
    template_name = f"{TEMPLATE_DIR}/cop_traces.svg"
    width = 360
    height = 360
    margin = 30

    def __init__(self, name: str, traces, provenance: dict = None) -> None:
        super().__init__(name, provenance)
        self.traces = [(label, trace.xy[trace.valid_mask]) for label, trace in traces]

    def get_context_data(self):
        stacked = np.vstack([xy for _, xy in self.traces]) if self.traces else np.zeros((1, 2))
        center = stacked.mean(axis=0)
        span = max(float(np.abs(stacked - center).max()), 1.0)
        scale = (self.width / 2 - self.margin) / span
        half = self.width / 2
        paths = []
        for index, (label, xy) in enumerate(self.traces):
            points = [(half + (x - center[0]) * scale, half - (y - center[1]) * scale) for x, y in xy]
            paths.append({"label": label, "points": polyline(points), "index": index})
        context = super().get_context_data()
        context.update({"paths": paths, "span": f"{span:.1f}", "half": fmt(half)})
        return context


def emit_plots(plots, directory) -> list:
    """Render every plot first, then write them; nothing is written if one plot cannot be drawn."""
    plots = list(plots)
    if not plots:
        raise PipelineError("plot", "no plots to emit")
    rendered = [(plot.filename, plot.render()) for plot in plots]
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for filename, content in rendered:
        path = directory / filename
        path.write_text(content, encoding="utf-8")
        paths.append(path)
    return paths
