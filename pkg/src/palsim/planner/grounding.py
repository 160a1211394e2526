"""Grounding: instantiate action schemas over typed objects.

Grounding is interleaved with delete-relaxed reachability: starting from the
initial state, schemas are matched against the growing fact set (a
backtracking join over positive preconditions), newly applicable actions
contribute their add lists, and the loop runs to fixpoint. Actions whose
positive preconditions can never hold are therefore pruned. Output order is
deterministic: sorted by (name, arguments).
"""

from __future__ import annotations

from dataclasses import dataclass

from .pddl import Atom, PddlDomain, PddlProblem, ROOT_TYPE


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre: frozenset[Atom]
    neg_pre: frozenset[Atom]
    add: frozenset[Atom]
    delete: frozenset[Atom]
    cost: float = 1.0

    @property
    def signature(self) -> str:
        return f"({self.name}{''.join(' ' + a for a in self.args)})"

    def sort_key(self) -> tuple:
        return (self.name, self.args)

    def applicable(self, state: frozenset[Atom]) -> bool:
        return self.pre <= state and not (self.neg_pre & state)

    def apply(self, state: frozenset[Atom]) -> frozenset[Atom]:
        return (state - self.delete) | self.add


def _substitute(atom: Atom, binding: dict[str, str]) -> Atom:
    return (atom[0],) + tuple(binding.get(a, a) for a in atom[1:])


def _objects_by_type(domain: PddlDomain, problem: PddlProblem) -> dict[str, list[str]]:
    table: dict[str, list[str]] = {}
    for obj in sorted(problem.objects):
        for ancestor in domain.ancestors(problem.objects[obj]):
            table.setdefault(ancestor, []).append(obj)
    table.setdefault(ROOT_TYPE, sorted(problem.objects))
    return table


class _SchemaMatcher:
    """Enumerates type-consistent bindings whose positive preconditions all
    hold in a given fact set."""

    def __init__(self, domain: PddlDomain, problem: PddlProblem, schema):
        self.schema = schema
        self.domain = domain
        self.param_types = dict(schema.params)
        self.objects_by_type = _objects_by_type(domain, problem)
        self.pos_pre = [lit.atom for lit in schema.precondition if lit.positive]

    def _fits(self, var: str, value: str, problem: PddlProblem) -> bool:
        need = self.param_types.get(var, ROOT_TYPE)
        have = problem.objects.get(value)
        return have is not None and self.domain.is_subtype(have, need)

    def bindings(self, facts_by_pred: dict[str, list[Atom]],
                 problem: PddlProblem):
        # most selective (fewest candidate facts) preconditions first
        order = sorted(self.pos_pre,
                       key=lambda a: (len(facts_by_pred.get(a[0], ())), a))

        def extend(i: int, binding: dict[str, str]):
            if i == len(order):
                yield from self._fill_free(binding)
                return
            atom = order[i]
            for fact in facts_by_pred.get(atom[0], ()):
                new = dict(binding)
                ok = True
                for want, got in zip(atom[1:], fact[1:]):
                    if want.startswith("?"):
                        bound = new.get(want)
                        if bound is None:
                            if not self._fits(want, got, problem):
                                ok = False
                                break
                            new[want] = got
                        elif bound != got:
                            ok = False
                            break
                    elif want != got:
                        ok = False
                        break
                if ok:
                    yield from extend(i + 1, new)

        yield from extend(0, {})

    def _fill_free(self, binding: dict[str, str]):
        free = [v for v, _ in self.schema.params if v not in binding]
        if not free:
            yield binding
            return

        def assign(i: int, current: dict[str, str]):
            if i == len(free):
                yield dict(current)
                return
            var = free[i]
            for obj in self.objects_by_type.get(self.param_types[var], ()):
                current[var] = obj
                yield from assign(i + 1, current)
            current.pop(var, None)

        yield from assign(0, dict(binding))


def ground(domain: PddlDomain, problem: PddlProblem) -> list[GroundAction]:
    """All delete-relaxed-reachable ground actions, in stable order."""
    matchers = [_SchemaMatcher(domain, problem, schema)
                for schema in sorted(domain.actions, key=lambda a: a.name)]
    facts: set[Atom] = set(problem.init)
    actions: dict[tuple, GroundAction] = {}

    changed = True
    while changed:
        changed = False
        facts_by_pred: dict[str, list[Atom]] = {}
        for fact in sorted(facts):
            facts_by_pred.setdefault(fact[0], []).append(fact)
        for matcher in matchers:
            schema = matcher.schema
            for binding in matcher.bindings(facts_by_pred, problem):
                args = tuple(binding[v] for v, _ in schema.params)
                key = (schema.name, args)
                if key in actions:
                    continue
                add = frozenset(_substitute(a, binding) for a in schema.add_list)
                delete = frozenset(_substitute(a, binding) for a in schema.del_list)
                pre = frozenset(_substitute(lit.atom, binding)
                                for lit in schema.precondition if lit.positive)
                neg = frozenset(_substitute(lit.atom, binding)
                                for lit in schema.precondition if not lit.positive)
                actions[key] = GroundAction(
                    name=schema.name, args=args, pre=pre, neg_pre=neg,
                    add=add, delete=delete - add)
                if not add <= facts:
                    facts.update(add)
                    changed = True
    return sorted(actions.values(), key=GroundAction.sort_key)
