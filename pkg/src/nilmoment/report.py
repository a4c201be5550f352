"""Machine-readable command reports.

A report is a JSON object::

    {"schema": "nilmoment.report/1", "version": ..., "command": ...,
     "inputs": {...}, "ok": true,
     "results": [{"name": ..., "status": "pass" | "fail" | "info" | "skipped",
                  "value": ..., "tol": ...}, ...]}

plus ``"timing"`` when requested. Floats are rounded to 10 significant digits
and quantities that are zero up to rounding print as 0.0, so reports are
byte-stable across runs and numeric backends.
"""
import json
import math

from . import __version__

REPORT_SCHEMA = "nilmoment.report/1"


def num(x, floor=0.0):
    """Round to 10 significant digits; magnitudes at or below ``floor`` become 0.0."""
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return str(x)
    if abs(x) <= floor:
        return 0.0
    return float(f"{x:.10g}")


def residual(x, tol):
    """A residual compared against ``tol``: exact below ``tol * 1e-3``, else 3 significant digits.

    Values far below the tolerance are rounding noise whose last digits depend
    on evaluation order; they print as 0.0.
    """
    x = float(x)
    if x <= tol * 1e-3:
        return 0.0
    return float(f"{x:.3g}")


class Report:
    def __init__(self, command, inputs):
        self.command = command
        self.inputs = inputs
        self.results = []
        self.timing = None
        self.lines = None  # replaces the generic text rendering when set

    def _add(self, name, status, value, tol, detail):
        entry = {"name": name, "status": status, "value": value, "tol": tol}
        if detail is not None:
            entry["detail"] = detail
        self.results.append(entry)

    def check(self, name, passed, value=None, tol=None, detail=None):
        self._add(name, "pass" if passed else "fail", value, tol, detail)
        return passed

    def info(self, name, value, tol=None, detail=None):
        self._add(name, "info", value, tol, detail)

    def skip(self, name, reason):
        self._add(name, "skipped", None, None, reason)

    @property
    def ok(self):
        return all(r["status"] != "fail" for r in self.results)

    def to_dict(self):
        out = {
            "schema": REPORT_SCHEMA,
            "version": __version__,
            "command": self.command,
            "inputs": self.inputs,
            "ok": self.ok,
            "results": self.results,
        }
        if self.timing is not None:
            out["timing"] = self.timing
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def text_lines(self):
        if self.lines is not None:
            return list(self.lines)
        lines = [f"{self.command}: {'OK' if self.ok else 'FAILED'}"]
        for r in self.results:
            label = r["status"].upper()
            value = r["value"]
            if isinstance(value, (dict, list)):
                value = json.dumps(value)
            line = f"  {label:7s} {r['name']}"
            if value is not None:
                line += f" = {value}"
            if r["tol"] is not None:
                line += f"  (tol {r['tol']:g})"
            if r.get("detail"):
                line += f"  [{r['detail']}]"
            lines.append(line)
        if self.timing is not None:
            lines.append(f"  time {self.timing['seconds']:.3f} s")
        return lines
