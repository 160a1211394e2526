"""Parser for a typed-STRIPS subset of PDDL.

Supported requirements: ``:strips`` and ``:typing``. Preconditions and goals
are conjunctions of positive or negative literals; effects are add/delete
lists. Anything outside the subset (numeric fluents, durative actions,
conditional effects, quantifiers, disjunction) is rejected with a
location-bearing diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

SUPPORTED_REQUIREMENTS = {":strips", ":typing", ":negative-preconditions",
                          ":equality"}
ROOT_TYPE = "object"

Atom = tuple  # (predicate, arg, arg, ...)


class PddlError(ValueError):
    """Parse or validation failure, with source position when known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


@dataclass(frozen=True)
class Literal:
    positive: bool
    atom: Atom

    def __str__(self):
        inner = "(" + " ".join(self.atom) + ")"
        return inner if self.positive else f"(not {inner})"


@dataclass
class ActionSchema:
    name: str
    params: list[tuple[str, str]]  # (?var, type)
    precondition: list[Literal]
    add_list: list[Atom]
    del_list: list[Atom]


@dataclass
class PddlDomain:
    name: str
    requirements: list[str]
    types: dict[str, str]  # type -> parent
    predicates: dict[str, list[str]]  # name -> parameter types
    actions: list[ActionSchema]

    def ancestors(self, type_name: str) -> set[str]:
        seen = set()
        cur = type_name
        while cur not in seen:
            seen.add(cur)
            cur = self.types.get(cur, ROOT_TYPE)
        return seen

    def is_subtype(self, type_name: str, ancestor: str) -> bool:
        return ancestor in self.ancestors(type_name)


@dataclass
class PddlProblem:
    name: str
    domain_name: str
    objects: dict[str, str]  # object -> type
    init: frozenset[Atom]
    goal: list[Literal]


# -- s-expression reader -------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    col: int


@dataclass
class _Node:
    """Either an atom token or a parenthesized list of nodes."""
    token: _Token | None
    children: list["_Node"] = field(default_factory=list)

    @property
    def is_atom(self) -> bool:
        return self.token is not None

    @property
    def pos(self) -> tuple[int, int]:
        if self.token is not None:
            return self.token.line, self.token.col
        if self.children:
            return self.children[0].pos
        return 0, 0

    def text(self) -> str:
        return self.token.text if self.token else ""


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            col += 1
            i += 1
        elif c == ";":
            while i < len(text) and text[i] != "\n":
                i += 1
        elif c in "()":
            tokens.append(_Token(c, line, col))
            col += 1
            i += 1
        else:
            start = i
            start_col = col
            while i < len(text) and text[i] not in " \t\r\n();":
                i += 1
                col += 1
            tokens.append(_Token(text[start:i].lower(), line, start_col))
    return tokens


def _read(tokens: list[_Token]) -> _Node:
    pos = 0

    def parse_node() -> _Node:
        nonlocal pos
        if pos >= len(tokens):
            raise PddlError("unexpected end of input: unbalanced parenthesis",
                            tokens[-1].line if tokens else 1,
                            tokens[-1].col if tokens else 1)
        tok = tokens[pos]
        pos += 1
        if tok.text == "(":
            node = _Node(None)
            while True:
                if pos >= len(tokens):
                    raise PddlError("missing closing parenthesis",
                                    tok.line, tok.col)
                if tokens[pos].text == ")":
                    pos += 1
                    return node
                node.children.append(parse_node())
        if tok.text == ")":
            raise PddlError("unbalanced closing parenthesis", tok.line, tok.col)
        return _Node(tok)

    root = parse_node()
    if pos != len(tokens):
        extra = tokens[pos]
        raise PddlError("trailing content after top-level form",
                        extra.line, extra.col)
    return root


def _typed_list(nodes: list[_Node], what: str) -> list[tuple[str, str]]:
    """Parse ``a b - t c d - u e`` into [(name, type), ...]; untyped -> object."""
    out: list[tuple[str, str]] = []
    pending: list[_Node] = []
    i = 0
    while i < len(nodes):
        node = nodes[i]
        if node.text() == "-":
            if i + 1 >= len(nodes) or not nodes[i + 1].is_atom:
                raise PddlError(f"{what}: dangling '-' in typed list", *node.pos)
            if not pending:
                raise PddlError(f"{what}: type with no names", *node.pos)
            type_name = nodes[i + 1].text()
            out.extend((p.text(), type_name) for p in pending)
            pending = []
            i += 2
        else:
            if not node.is_atom:
                raise PddlError(f"{what}: expected a name", *node.pos)
            pending.append(node)
            i += 1
    out.extend((p.text(), ROOT_TYPE) for p in pending)
    return out


def _atom(node: _Node, what: str) -> Atom:
    if node.is_atom or not node.children or not node.children[0].is_atom:
        raise PddlError(f"{what}: expected (predicate args...)", *node.pos)
    for child in node.children:
        if not child.is_atom:
            raise PddlError(f"{what}: nested structure not allowed in atoms",
                            *child.pos)
    return tuple(c.text() for c in node.children)


def _literals(node: _Node, what: str) -> list[Literal]:
    """A literal or an (and ...) of literals."""
    if node.is_atom:
        raise PddlError(f"{what}: expected a condition", *node.pos)
    if node.children and node.children[0].text() == "and":
        out = []
        for child in node.children[1:]:
            out.extend(_literals(child, what))
        return out
    if node.children and node.children[0].text() == "not":
        if len(node.children) != 2:
            raise PddlError(f"{what}: (not ...) takes one literal", *node.pos)
        return [Literal(False, _atom(node.children[1], what))]
    head = node.children[0].text() if node.children else ""
    if head in ("or", "imply", "exists", "forall", "when", ">=", "<=", "<", ">",
                "increase", "decrease", "assign"):
        raise PddlError(f"{what}: {head!r} is outside the supported subset",
                        *node.pos)
    return [Literal(True, _atom(node, what))]


# -- domain / problem assembly ---------------------------------------------------

def parse_domain(text: str) -> PddlDomain:
    root = _read(_tokenize(text))
    if len(root.children) < 2 or root.children[0].text() != "define":
        raise PddlError("expected (define (domain ...) ...)", *root.pos)
    head = root.children[1]
    if head.is_atom or len(head.children) != 2 or head.children[0].text() != "domain":
        raise PddlError("expected (domain <name>)", *head.pos)
    domain = PddlDomain(name=head.children[1].text(), requirements=[],
                        types={}, predicates={}, actions=[])

    for section in root.children[2:]:
        if section.is_atom or not section.children:
            raise PddlError("expected a domain section", *section.pos)
        tag = section.children[0].text()
        if tag == ":requirements":
            for req in section.children[1:]:
                name = req.text()
                if name not in SUPPORTED_REQUIREMENTS:
                    raise PddlError(f"unsupported requirement {name}", *req.pos)
                domain.requirements.append(name)
        elif tag == ":types":
            for name, parent in _typed_list(section.children[1:], ":types"):
                domain.types[name] = parent
        elif tag == ":predicates":
            for decl in section.children[1:]:
                if decl.is_atom or not decl.children:
                    raise PddlError(":predicates: expected (name params...)",
                                    *decl.pos)
                name = decl.children[0].text()
                params = _typed_list(decl.children[1:], f"predicate {name}")
                for var, _ in params:
                    if not var.startswith("?"):
                        raise PddlError(
                            f"predicate {name}: parameter {var!r} must start with ?",
                            *decl.pos)
                domain.predicates[name] = [t for _, t in params]
        elif tag == ":action":
            domain.actions.append(_parse_action(section))
        elif tag in (":functions", ":constants"):
            raise PddlError(f"{tag} is outside the supported subset", *section.pos)
        else:
            raise PddlError(f"unknown domain section {tag!r}", *section.pos)

    _validate_domain(domain)
    return domain


def _parse_action(section: _Node) -> ActionSchema:
    if len(section.children) < 2 or not section.children[1].is_atom:
        raise PddlError(":action: missing name", *section.pos)
    name = section.children[1].text()
    params: list[tuple[str, str]] = []
    precondition: list[Literal] = []
    add_list: list[Atom] = []
    del_list: list[Atom] = []
    i = 2
    while i < len(section.children):
        key = section.children[i].text()
        if i + 1 >= len(section.children):
            raise PddlError(f"action {name}: {key} missing value",
                            *section.children[i].pos)
        value = section.children[i + 1]
        if key == ":parameters":
            params = _typed_list(value.children, f"action {name} parameters")
            for var, _ in params:
                if not var.startswith("?"):
                    raise PddlError(
                        f"action {name}: parameter {var!r} must start with ?",
                        *value.pos)
        elif key == ":precondition":
            precondition = _literals(value, f"action {name} precondition")
        elif key == ":effect":
            for lit in _literals(value, f"action {name} effect"):
                (add_list if lit.positive else del_list).append(lit.atom)
        elif key in (":duration", ":condition"):
            raise PddlError(f"action {name}: durative actions are not supported",
                            *section.children[i].pos)
        else:
            raise PddlError(f"action {name}: unknown key {key}",
                            *section.children[i].pos)
        i += 2
    return ActionSchema(name, params, precondition, add_list, del_list)


def _validate_domain(domain: PddlDomain) -> None:
    for type_name, parent in domain.types.items():
        if parent != ROOT_TYPE and parent not in domain.types:
            raise PddlError(f"type {type_name} has undeclared parent {parent}")
    for action in domain.actions:
        scope = dict(action.params)
        for var, type_name in action.params:
            if type_name != ROOT_TYPE and type_name not in domain.types:
                raise PddlError(
                    f"action {action.name}: parameter type {type_name} undeclared")
        literal_atoms = [(lit.atom, "precondition") for lit in action.precondition]
        literal_atoms += [(a, "effect") for a in action.add_list]
        literal_atoms += [(a, "effect") for a in action.del_list]
        for atom, where in literal_atoms:
            _check_atom(domain, atom, scope, f"action {action.name} {where}")


def _check_atom(domain: PddlDomain, atom: Atom, scope: dict[str, str],
                where: str) -> None:
    pred = atom[0]
    if pred == "=":
        return
    if pred not in domain.predicates:
        raise PddlError(f"{where}: undeclared predicate {pred}")
    expected = domain.predicates[pred]
    if len(atom) - 1 != len(expected):
        raise PddlError(
            f"{where}: predicate {pred} takes {len(expected)} arguments, "
            f"got {len(atom) - 1}")
    for arg in atom[1:]:
        if arg.startswith("?") and arg not in scope:
            raise PddlError(f"{where}: unbound variable {arg}")


def parse_problem(text: str, domain: PddlDomain) -> PddlProblem:
    root = _read(_tokenize(text))
    if len(root.children) < 2 or root.children[0].text() != "define":
        raise PddlError("expected (define (problem ...) ...)", *root.pos)
    head = root.children[1]
    if head.is_atom or len(head.children) != 2 or head.children[0].text() != "problem":
        raise PddlError("expected (problem <name>)", *head.pos)

    name = head.children[1].text()
    domain_name = ""
    objects: dict[str, str] = {}
    init: set[Atom] = set()
    goal: list[Literal] = []

    for section in root.children[2:]:
        if section.is_atom or not section.children:
            raise PddlError("expected a problem section", *section.pos)
        tag = section.children[0].text()
        if tag == ":domain":
            domain_name = section.children[1].text()
        elif tag == ":objects":
            for obj, type_name in _typed_list(section.children[1:], ":objects"):
                objects[obj] = type_name
        elif tag == ":init":
            for node in section.children[1:]:
                init.add(_atom(node, ":init"))
        elif tag == ":goal":
            if len(section.children) != 2:
                raise PddlError(":goal takes one condition", *section.pos)
            goal = _literals(section.children[1], ":goal")
        else:
            raise PddlError(f"unknown problem section {tag!r}", *section.pos)

    problem = PddlProblem(name, domain_name, objects, frozenset(init), goal)
    _validate_problem(domain, problem)
    return problem


def _validate_problem(domain: PddlDomain, problem: PddlProblem) -> None:
    if problem.domain_name and problem.domain_name != domain.name:
        raise PddlError(
            f"problem targets domain {problem.domain_name!r}, got {domain.name!r}")
    for obj, type_name in problem.objects.items():
        if type_name != ROOT_TYPE and type_name not in domain.types:
            raise PddlError(f"object {obj} has undeclared type {type_name}")
    for atom in problem.init:
        _check_ground_atom(domain, problem, atom, ":init")
    for lit in problem.goal:
        _check_ground_atom(domain, problem, lit.atom, ":goal")


def _check_ground_atom(domain: PddlDomain, problem: PddlProblem, atom: Atom,
                       where: str) -> None:
    pred = atom[0]
    if pred not in domain.predicates:
        raise PddlError(f"{where}: undeclared predicate {pred}")
    expected = domain.predicates[pred]
    if len(atom) - 1 != len(expected):
        raise PddlError(f"{where}: predicate {pred} takes {len(expected)} "
                        f"arguments, got {len(atom) - 1}")
    for arg, expected_type in zip(atom[1:], expected):
        if arg not in problem.objects:
            raise PddlError(f"{where}: unknown object {arg} in {atom}")
        if not domain.is_subtype(problem.objects[arg], expected_type):
            raise PddlError(
                f"{where}: object {arg} of type {problem.objects[arg]} does not "
                f"fit {expected_type} in {atom}")


# -- pretty printing -----------------------------------------------------------

def format_domain(domain: PddlDomain) -> str:
    lines = [f"(define (domain {domain.name})"]
    if domain.requirements:
        lines.append("  (:requirements " + " ".join(domain.requirements) + ")")
    if domain.types:
        entries = " ".join(f"{t} - {p}" for t, p in domain.types.items())
        lines.append(f"  (:types {entries})")
    if domain.predicates:
        decls = []
        for pred, types in domain.predicates.items():
            args = "".join(f" ?a{i} - {t}" for i, t in enumerate(types))
            decls.append(f"({pred}{args})")
        lines.append("  (:predicates " + " ".join(decls) + ")")
    for a in domain.actions:
        params = " ".join(f"{v} - {t}" for v, t in a.params)
        pre = " ".join(str(lit) for lit in a.precondition)
        effects = [f"({' '.join(atom)})" for atom in a.add_list]
        effects += [f"(not ({' '.join(atom)}))" for atom in a.del_list]
        lines.append(f"  (:action {a.name}")
        lines.append(f"    :parameters ({params})")
        lines.append(f"    :precondition (and {pre})")
        lines.append(f"    :effect (and {' '.join(effects)}))")
    lines.append(")")
    return "\n".join(lines)


def format_problem(problem: PddlProblem) -> str:
    lines = [f"(define (problem {problem.name})",
             f"  (:domain {problem.domain_name})"]
    objs = " ".join(f"{o} - {t}" for o, t in problem.objects.items())
    lines.append(f"  (:objects {objs})")
    init = " ".join(f"({' '.join(atom)})" for atom in sorted(problem.init))
    lines.append(f"  (:init {init})")
    goal = " ".join(str(lit) for lit in problem.goal)
    lines.append(f"  (:goal (and {goal}))")
    lines.append(")")
    return "\n".join(lines)


def parse_pddl(domain_text: str, problem_text: str) -> tuple[PddlDomain, PddlProblem]:
    domain = parse_domain(domain_text)
    problem = parse_problem(problem_text, domain)
    return domain, problem
