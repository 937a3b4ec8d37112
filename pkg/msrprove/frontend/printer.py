from __future__ import annotations

from typing import List

from msrprove.frontend.theory import Lemma, ProtocolRule, Theory, TraceMode
from msrprove.properties.formula import And, Formula, Implies, Not, Or, Quantified

_INDENT = "    "


def pretty_print(theory: Theory) -> str:
    """Canonical ``.spthy`` text; parsing it gives back an equal theory."""
    blocks: List[str] = []
    if theory.functions:
        blocks.append("functions: " + ", ".join(str(sig) for sig in theory.functions))
    if theory.equations:
        blocks.append("equations:\n" + ",\n".join(f"{_INDENT}{eq}" for eq in theory.equations))
    blocks.extend(_rule(rule) for rule in theory.rules)
    blocks.extend(format_lemma(lemma) for lemma in theory.lemmas)
    body = "\n\n".join(blocks)
    return f"theory {theory.name}\nbegin\n\n{body}\n\nend\n" if body else f"theory {theory.name}\nbegin\n\nend\n"


def format_formula(formula: Formula) -> str:
    """Formula text in the lemma syntax, parenthesizing nested quantifiers."""
    if isinstance(formula, Quantified):
        names = " ".join(str(v) for v in formula.variables)
        return f"{formula.quantifier.value} {names}. {format_formula(formula.body)}"
    if isinstance(formula, And):
        return "(" + " & ".join(_nested(p) for p in formula.parts) + ")"
    if isinstance(formula, Or):
        return "(" + " | ".join(_nested(p) for p in formula.parts) + ")"
    if isinstance(formula, Implies):
        return f"({_nested(formula.antecedent)} ==> {_nested(formula.consequent)})"
    if isinstance(formula, Not):
        return f"not({format_formula(formula.body)})"
    return str(formula)


def format_lemma(lemma: Lemma) -> str:
    """A lemma declaration as it appears in a theory file."""
    mode = " exists-trace" if lemma.mode is TraceMode.EXISTS_TRACE else ""
    return f'lemma {lemma.name}:{mode}\n{_INDENT}"{format_formula(lemma.formula)}"'


# ---- Helpers


def _nested(formula: Formula) -> str:
    text = format_formula(formula)
    return f"({text})" if isinstance(formula, Quantified) else text


def _facts(facts: tuple) -> str:
    return ", ".join(str(f) for f in facts)


def _rule(rule: ProtocolRule) -> str:
    lines = [f"rule {rule.name}:"]
    if rule.lets:
        lines.append(f"{_INDENT}let")
        lines.extend(f"{_INDENT * 2}{binding.var} = {binding.term}" for binding in rule.lets)
        lines.append(f"{_INDENT}in")
    lines.append(f"{_INDENT}[ {_facts(rule.premises)} ]")
    lines.append(f"{_INDENT}--[ {_facts(rule.actions)} ]->" if rule.actions else f"{_INDENT}-->")
    lines.append(f"{_INDENT}[ {_facts(rule.conclusions)} ]")
    return "\n".join(lines)
