"""Level mappings: linear combinations of list-length and term-size norms.

A level mapping assigns each ground atom a natural number; the cut atom has
level 0 by convention.  Mappings are declared per predicate as
``c0 + c1*norm(arg_i) + ...`` with norms ``len`` (list cells along the spine)
and ``size`` (constructor count).
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import CUT, Compound, Pred, Var, is_ground, list_norm, term_size, vars_of

NORMS = ("len", "size")


@dataclass(frozen=True)
class LevelMapping:
    predicate: str
    arity: int
    constant: int = 0
    terms: tuple = ()  # of (coefficient, norm name, argument index)

    def __post_init__(self):
        for coeff, norm, idx in self.terms:
            if norm not in NORMS:
                raise ValueError(f"unknown norm {norm!r}")
            if not 0 <= idx < self.arity:
                raise ValueError(f"argument index {idx} out of range for /{self.arity}")
            if coeff < 0:
                raise ValueError("negative coefficients would break well-foundedness")

    @property
    def indicator(self) -> str:
        return f"{self.predicate}/{self.arity}"


def _norm_value(norm: str, t) -> int:
    return list_norm(t) if norm == "len" else term_size(t)


def level_of(atom, mappings: dict) -> int:
    """Level of a ground atom; ``!`` has level 0."""
    if atom is CUT:
        return 0
    if not is_ground(atom):
        raise ValueError(f"level_of requires a ground atom, got {atom!r}")
    lm = mappings.get(atom.indicator)
    if lm is None:
        raise KeyError(f"no level mapping declared for {atom.indicator}")
    total = lm.constant
    for coeff, norm, idx in lm.terms:
        total += coeff * _norm_value(norm, atom.args[idx])
    return total


def _spine_closed(t) -> bool:
    """True when every instance of t has the same list norm (closed spine)."""
    while True:
        if isinstance(t, Compound) and t.functor == "." and len(t.args) == 2:
            t = t.args[1]
        else:
            return not isinstance(t, Var)


def atom_level_bound(atom: Pred, mappings: dict):
    """Max level over all ground instances of the atom, or None if unbounded."""
    lm = mappings.get(atom.indicator)
    if lm is None:
        raise KeyError(f"no level mapping declared for {atom.indicator}")
    total = lm.constant
    for coeff, norm, idx in lm.terms:
        if coeff == 0:
            continue
        arg = atom.args[idx]
        if norm == "len":
            if not _spine_closed(arg):
                return None
            n = 0
            t = arg
            while isinstance(t, Compound) and t.functor == "." and len(t.args) == 2:
                n += 1
                t = t.args[1]
            total += coeff * n
        else:  # size varies with any variable
            if vars_of(arg):
                return None
            total += coeff * term_size(arg)
    return total
