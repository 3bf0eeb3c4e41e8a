"""Token-reducing, semantics-preserving simplification of Python source."""

from .syntax import ParseError, SyntaxTree, normalize, parse, render
from .rules import (
    RULE_IDS,
    RULES,
    Rule,
    RuleConfig,
    RewriteResult,
    applicable_rules,
    apply_rule,
    simplify_independent,
    simplify_joint,
)

__version__ = "0.1.0"

__all__ = [
    "ParseError",
    "SyntaxTree",
    "parse",
    "render",
    "normalize",
    "RULE_IDS",
    "RULES",
    "Rule",
    "RuleConfig",
    "RewriteResult",
    "applicable_rules",
    "apply_rule",
    "simplify_independent",
    "simplify_joint",
    "__version__",
]
