"""Tiny arithmetic language over certified constants, for the command line.

Examples: ``log(alpha)/log(phi)``, ``gamma(4)`` (or ``gamma:4``), ``sqrt(2)``,
``log(g(7)/c_alpha)/log(alpha) - 2``.  Decimal literals are read exactly.
"""

from __future__ import annotations

import ast
import operator
import re

from .algebraic import AlgebraicContext
from .certreal import CertReal, Provider

_BINARY = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_FUNCS = {"log": CertReal.log, "sqrt": CertReal.sqrt, "exp": CertReal.exp}
_CONSTANTS = {
    "alpha": lambda c: c.alpha,
    "phi": lambda c: c.phi,
    "beta": lambda c: c.beta_modulus,
    "c_alpha": lambda c: c.c_alpha,
}
_PER_K = {"gamma": lambda c: c.gamma, "g": lambda c: c.g_k_gamma}


class ExpressionError(ValueError):
    pass


def _eval(node, text: str, prec: int) -> CertReal:
    if isinstance(node, ast.Expression):
        return _eval(node.body, text, prec)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        # re-read the literal from source so 0.1 stays 1/10
        return CertReal.exact(ast.get_source_segment(text, node), prec)
    if isinstance(node, ast.Name) and node.id in _CONSTANTS:
        return _CONSTANTS[node.id](AlgebraicContext.build(None, prec))
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
        return _BINARY[type(node.op)](_eval(node.left, text, prec), _eval(node.right, text, prec))
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
        exponent = node.right
        if isinstance(exponent, ast.UnaryOp) and isinstance(exponent.op, ast.USub):
            exponent, sign = exponent.operand, -1
        else:
            sign = 1
        if not (isinstance(exponent, ast.Constant) and isinstance(exponent.value, int)):
            raise ExpressionError("only integer powers are supported")
        return _eval(node.left, text, prec) ** (sign * exponent.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        value = _eval(node.operand, text, prec)
        return -value if isinstance(node.op, ast.USub) else value
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and len(node.args) == 1 and not node.keywords:
        name, (arg,) = node.func.id, node.args
        if name in _FUNCS:
            return _FUNCS[name](_eval(arg, text, prec))
        if name in _PER_K:
            if not (isinstance(arg, ast.Constant) and isinstance(arg.value, int)):
                raise ExpressionError(f"{name}(k) needs an integer k")
            return _PER_K[name](AlgebraicContext.build(arg.value, prec))
    raise ExpressionError(f"unsupported syntax: {ast.get_source_segment(text, node) or ast.dump(node)}")


def evaluate(text: str, prec: int) -> CertReal:
    text = re.sub(r"\b(gamma|g):(\d+)", r"\1(\2)", text)
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}") from exc
    return _eval(tree, text.strip(), prec)


def provider(text: str) -> Provider:
    """Precision-indexed enclosure of an expression; parses once up front."""
    evaluate(text, 64)
    return lambda prec: evaluate(text, prec)
