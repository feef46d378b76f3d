"""Minimal SVG chart emission: axes, polylines, shaded bands.

Output is deterministic (fixed-precision coordinates, no timestamps or
generator metadata) so rerunning a report reproduces identical files.
"""

from __future__ import annotations

from typing import Sequence

WIDTH, HEIGHT = 480, 360
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 56, 16, 28, 44


class Chart:
    def __init__(self, title: str, xlabel: str, ylabel: str,
                 xlim: tuple[float, float] = (0.0, 1.0),
                 ylim: tuple[float, float] = (0.0, 1.0)):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.xlim = xlim
        self.ylim = ylim
        self.elements: list[str] = []

    def _px(self, x: float) -> float:
        x0, x1 = self.xlim
        return MARGIN_L + (x - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R)

    def _py(self, y: float) -> float:
        y0, y1 = self.ylim
        return HEIGHT - MARGIN_B - (y - y0) / (y1 - y0) * (HEIGHT - MARGIN_T - MARGIN_B)

    def _fmt(self, v: float) -> str:
        return f"{v:.2f}"

    def polyline(self, xs: Sequence[float], ys: Sequence[float], color: str,
                 width: float = 1.5, dash: str | None = None) -> None:
        pts = " ".join(f"{self._fmt(self._px(x))},{self._fmt(self._py(y))}"
                       for x, y in zip(xs, ys))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.elements.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="{width}"'
            f'{dash_attr} points="{pts}"/>'
        )

    def band(self, xs: Sequence[float], lo: Sequence[float], hi: Sequence[float],
             color: str, opacity: float = 0.25) -> None:
        forward = [(x, y) for x, y in zip(xs, hi)]
        backward = [(x, y) for x, y in zip(reversed(list(xs)), reversed(list(lo)))]
        pts = " ".join(f"{self._fmt(self._px(x))},{self._fmt(self._py(y))}"
                       for x, y in forward + backward)
        self.elements.append(
            f'<polygon fill="{color}" fill-opacity="{opacity}" stroke="none" points="{pts}"/>'
        )

    def points(self, xs: Sequence[float], ys: Sequence[float], color: str,
               radius: float = 3.0) -> None:
        for x, y in zip(xs, ys):
            self.elements.append(
                f'<circle cx="{self._fmt(self._px(x))}" cy="{self._fmt(self._py(y))}"'
                f' r="{radius}" fill="{color}"/>'
            )

    def legend(self, entries: Sequence[tuple[str, str]]) -> None:
        x = MARGIN_L + 10
        y = MARGIN_T + 6
        for label, color in entries:
            self.elements.append(
                f'<rect x="{x}" y="{y}" width="14" height="3" fill="{color}"/>'
            )
            self.elements.append(
                f'<text x="{x + 20}" y="{y + 5}" font-size="11" fill="#333">{label}</text>'
            )
            y += 16

    def _axes(self) -> list[str]:
        x0, x1 = self.xlim
        y0, y1 = self.ylim
        parts = [
            f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{WIDTH - MARGIN_L - MARGIN_R}"'
            f' height="{HEIGHT - MARGIN_T - MARGIN_B}" fill="none" stroke="#999"/>'
        ]
        for i in range(5):
            fx = x0 + (x1 - x0) * i / 4
            fy = y0 + (y1 - y0) * i / 4
            px, py = self._px(fx), self._py(fy)
            parts.append(
                f'<text x="{self._fmt(px)}" y="{HEIGHT - MARGIN_B + 16}" font-size="10"'
                f' text-anchor="middle" fill="#333">{fx:.2f}</text>'
            )
            parts.append(
                f'<text x="{MARGIN_L - 6}" y="{self._fmt(py + 3)}" font-size="10"'
                f' text-anchor="end" fill="#333">{fy:.2f}</text>'
            )
        parts.append(
            f'<text x="{(MARGIN_L + WIDTH - MARGIN_R) / 2}" y="{HEIGHT - 8}"'
            f' font-size="12" text-anchor="middle" fill="#111">{self.xlabel}</text>'
        )
        parts.append(
            f'<text x="14" y="{(MARGIN_T + HEIGHT - MARGIN_B) / 2}" font-size="12"'
            f' text-anchor="middle" fill="#111"'
            f' transform="rotate(-90 14 {(MARGIN_T + HEIGHT - MARGIN_B) / 2})">{self.ylabel}</text>'
        )
        parts.append(
            f'<text x="{WIDTH / 2}" y="18" font-size="13" text-anchor="middle"'
            f' fill="#111">{self.title}</text>'
        )
        return parts

    def to_svg(self) -> str:
        body = "\n".join(self._axes() + self.elements)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}"'
            f' viewBox="0 0 {WIDTH} {HEIGHT}">\n{body}\n</svg>\n'
        )


def roc_chart(points, title: str = "ROC curve") -> str:
    chart = Chart(title, "False positive rate", "True positive rate")
    chart.polyline([0.0, 1.0], [0.0, 1.0], "#999", width=1.0, dash="4 3")
    chart.polyline([p.x for p in points], [p.y for p in points], "#1f6fb2", width=2.0)
    chart.legend([("model", "#1f6fb2"), ("chance", "#999")])
    return chart.to_svg()


def pr_chart(points, prevalence: float, title: str = "Precision-recall curve") -> str:
    chart = Chart(title, "Recall", "Precision")
    chart.polyline([0.0, 1.0], [prevalence, prevalence], "#999", width=1.0, dash="4 3")
    chart.polyline([p.x for p in points], [p.y for p in points], "#b2541f", width=2.0)
    chart.legend([("model", "#b2541f"), ("prevalence", "#999")])
    return chart.to_svg()


def reliability_chart(bins, title: str = "Reliability diagram") -> str:
    chart = Chart(title, "Mean predicted probability", "Observed frequency")
    chart.polyline([0.0, 1.0], [0.0, 1.0], "#999", width=1.0, dash="4 3")
    occupied = [b for b in bins if b.n > 0]
    xs = [b.mean_predicted for b in occupied]
    ys = [b.observed_frequency for b in occupied]
    chart.polyline(xs, ys, "#2a7f4f", width=1.5)
    chart.points(xs, ys, "#2a7f4f")
    chart.legend([("model", "#2a7f4f"), ("ideal", "#999")])
    return chart.to_svg()


def dca_chart(curve, title: str = "Decision curve analysis") -> str:
    lo_band = min(curve.model_nb + curve.treat_all_nb + (0.0,))
    hi_band = max(curve.model_nb + (0.05,))
    if curve.bands:
        lo_band = min([lo_band] + [b[0] for b in curve.bands])
        hi_band = max([hi_band] + [b[1] for b in curve.bands])
    span = hi_band - lo_band
    chart = Chart(
        title,
        "Threshold probability",
        "Net benefit",
        xlim=(0.0, max(curve.thresholds)),
        ylim=(lo_band - 0.05 * span, hi_band + 0.05 * span),
    )
    xs = list(curve.thresholds)
    if curve.bands:
        chart.band(xs, [b[0] for b in curve.bands], [b[1] for b in curve.bands], "#1f6fb2")
    chart.polyline(xs, [0.0] * len(xs), "#555", width=1.0, dash="2 3")
    chart.polyline(xs, list(curve.treat_all_nb), "#999", width=1.5, dash="4 3")
    chart.polyline(xs, list(curve.model_nb), "#1f6fb2", width=2.0)
    chart.legend([("model", "#1f6fb2"), ("treat all", "#999"), ("treat none", "#555")])
    return chart.to_svg()
