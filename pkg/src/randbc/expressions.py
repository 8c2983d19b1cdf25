"""Tiny expression evaluator for coefficient and boundary fields.

Config values like coeff.a = "1 + 0.5*exp(-50*((x1-0.5)**2 + (x2-0.5)**2))"
are evaluated over lattice coordinates with a restricted namespace: the
coordinates (x, y, aliases x1, x2), numpy math functions, and the constants
pi and e.  Nothing else resolves, and builtins are disabled.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

_FUNCTIONS = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "arctan", "arctan2", "sinh", "cosh",
                 "tanh", "exp", "log", "log10", "sqrt", "abs", "hypot",
                 "minimum", "maximum", "where")
}
_FUNCTIONS["pi"] = np.pi
_FUNCTIONS["e"] = np.e


def evaluate_field_expression(expr: str, X, Y) -> np.ndarray:
    """Evaluate expr on coordinate arrays; always returns an array of X's shape."""
    if not isinstance(expr, str) or not expr.strip():
        raise ConfigError(f"expected a coordinate expression, got {expr!r}")
    names = dict(_FUNCTIONS)
    names.update({"x": X, "y": Y, "x1": X, "x2": Y})
    try:
        code = compile(expr, "<config>", "eval")
        value = eval(code, {"__builtins__": {}}, names)  # noqa: S307 - namespace is closed
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"cannot evaluate expression {expr!r}: {exc}") from exc
    out = np.asarray(value, dtype=float)
    if out.ndim == 0:
        out = np.full(np.shape(X), float(out))
    if out.shape != np.shape(X):
        raise ConfigError(
            f"expression {expr!r} produced shape {out.shape}, expected {np.shape(X)}")
    return out
