"""Tiny arithmetic expression language compiled to numpy callables.

Grammar: numeric literals, the variables declared by the caller, ``+ - * / ^``,
parentheses, and the functions ``sqrt ln exp abs sign``.  The constant ``pi``
is also recognised.  ``^`` is exponentiation.
"""
import ast

import numpy as np

FUNCTIONS = {
    "sqrt": np.sqrt,
    "ln": np.log,
    "log": np.log,
    "exp": np.exp,
    "abs": np.abs,
    "sign": np.sign,
}
CONSTANTS = {"pi": np.pi}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


class ExpressionError(ValueError):
    pass


def _compile_node(node, variables):
    if isinstance(node, ast.Expression):
        return _compile_node(node.body, variables)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ExpressionError(f"unsupported literal {node.value!r}")
        value = float(node.value)
        return lambda env: value
    if isinstance(node, ast.Name):
        name = node.id
        if name in variables:
            return lambda env: env[name]
        if name in CONSTANTS:
            value = CONSTANTS[name]
            return lambda env: value
        raise ExpressionError(f"unknown variable {name!r}")
    if isinstance(node, ast.BinOp):
        op = _BINOPS.get(type(node.op))
        if op is None:
            raise ExpressionError(f"unsupported operator {type(node.op).__name__}")
        left = _compile_node(node.left, variables)
        right = _compile_node(node.right, variables)
        if op is np.power:
            # float base keeps negative integer exponents legal
            return lambda env: np.power(np.asarray(left(env), dtype=float), right(env))
        return lambda env: op(left(env), right(env))
    if isinstance(node, ast.UnaryOp):
        operand = _compile_node(node.operand, variables)
        if isinstance(node.op, ast.USub):
            return lambda env: np.negative(operand(env))
        if isinstance(node.op, ast.UAdd):
            return operand
        raise ExpressionError("unsupported unary operator")
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
            raise ExpressionError("unsupported function call")
        if node.keywords or len(node.args) != 1:
            raise ExpressionError(f"{node.func.id} takes exactly one argument")
        fn = FUNCTIONS[node.func.id]
        arg = _compile_node(node.args[0], variables)
        return lambda env: fn(arg(env))
    raise ExpressionError(f"unsupported syntax: {type(node).__name__}")


class Expression:
    """A parsed expression; call it with keyword arguments for its variables."""

    def __init__(self, text, variables=("t",)):
        self.text = text.strip()
        self.variables = tuple(variables)
        if not self.text:
            raise ExpressionError("empty expression")
        if "**" in self.text:
            raise ExpressionError("use '^' for powers")
        try:
            tree = ast.parse(self.text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {self.text!r}: {exc.msg}") from None
        self._fn = _compile_node(tree, set(self.variables))

    def __call__(self, **values):
        missing = set(self.variables) - set(values)
        if missing:
            raise ExpressionError(f"missing variables: {sorted(missing)}")
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = self._fn(values)
        shape = np.broadcast(*[np.asarray(values[v]) for v in self.variables]).shape
        return np.broadcast_to(np.asarray(out, dtype=float), shape).copy() if shape else float(out)

    def __repr__(self):
        return f"Expression({self.text!r})"


def compile_expression(text, variables=("t",)):
    return Expression(text, variables)
