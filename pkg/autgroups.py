"""
Automorfismos de cúbicas: verificación de generadores, clausura de grupos
finitos de matrices proyectivas, invariantes estructurales desde la tabla
de Cayley y acción sobre los puntos singulares.
"""

import logging
from collections import Counter, deque
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import sympy
from sympy.combinatorics import Permutation, PermutationGroup
from sympy.combinatorics.named_groups import (
    CyclicGroup, SymmetricGroup, AlternatingGroup, DihedralGroup,
)
from sympy.combinatorics.group_constructs import DirectProduct

from errors import NotInvariant, ExceedsCap, NotStable
from multipoly import LinearChange, substitute
from singularities import transform_point

logger = logging.getLogger(__name__)

DEFAULT_CAP = 2000


class ProjMatrix:
    """Matriz 5x5 módulo escalares: la primera entrada no nula (por filas) vale 1"""

    __slots__ = ('field', 'entries', '_rows', 'change')

    def __init__(self, field, entries):
        self.field = field
        values = [[field(v) for v in row] for row in entries]
        lead = next((v for row in values for v in row if v), None)
        if lead is None:
            raise ValueError("La matriz nula no define una transformación proyectiva")
        inv = lead.inverse()
        self.entries = tuple(tuple(v * inv for v in row) for row in values)
        self._rows = tuple(tuple((k, v) for k, v in enumerate(row) if v) for row in self.entries)
        self.change = LinearChange(field, self.entries, check=False)

    @classmethod
    def from_change(cls, change):
        return cls(change.field, change.matrix)

    @classmethod
    def identity(cls, field, n=5):
        return cls.from_change(LinearChange.identity(field, n))

    @property
    def n(self):
        return len(self.entries)

    def __mul__(self, other):
        """Producto A·B: en vectores fila, primero A y luego B"""
        n = self.n
        zero = self.field.zero
        rows = []
        for i in range(n):
            row = [zero] * n
            for k, a in self._rows[i]:
                for j, b in other._rows[k]:
                    row[j] = row[j] + a * b
            rows.append(row)
        return ProjMatrix(self.field, rows)

    def __eq__(self, other):
        return isinstance(other, ProjMatrix) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def is_identity(self):
        return all((v == 1) if i == j else not v
                   for i, row in enumerate(self.entries) for j, v in enumerate(row))

    def to_json(self):
        return [[v.to_json() for v in row] for row in self.entries]

    def __repr__(self):
        return f"ProjMatrix({self.change!r})"


def invariance_scalar(M, f):
    """
    λ con substitute(f, M) = λ·f. Acepta ProjMatrix o LinearChange; solo
    con cambios sin normalizar se cumple λ(MN) = λ(M)·λ(N).
    """
    change = M.change if isinstance(M, ProjMatrix) else M
    if f.is_zero():
        raise NotInvariant("El polinomio nulo no tiene escalar de invariancia")
    image = substitute(f, change)
    exp, coeff = f.sorted_terms()[0]
    scalar = image.coefficient(exp) / coeff
    if not scalar or image != f.scale(scalar):
        raise NotInvariant("La transformación no preserva la cúbica", change=change)
    return scalar


def element_order(M, cap=DEFAULT_CAP):
    identity = ProjMatrix.identity(M.field, M.n)
    power = M
    for k in range(1, cap + 1):
        if power == identity:
            return k
        power = power * M
    raise ExceedsCap(f"El elemento no tiene orden <= {cap}", cap=cap)


@dataclass
class FiniteMatrixGroup:
    elements: list
    generators: list = dc_field(default_factory=list)

    def __post_init__(self):
        self.index = {m: i for i, m in enumerate(self.elements)}

    @property
    def order(self):
        return len(self.elements)

    @cached_property
    def identity_index(self):
        return next(i for i, m in enumerate(self.elements) if m.is_identity())

    @cached_property
    def multiplication_table(self):
        """table[i][j] = índice de elements[i]·elements[j]"""
        table = []
        for a in self.elements:
            table.append([self.index[a * b] for b in self.elements])
        return table


def group_closure(gens, cap=DEFAULT_CAP):
    """Clausura por productos en anchura, con normalización proyectiva canónica"""
    if not gens:
        raise ValueError("Se necesita al menos un generador")
    identity = ProjMatrix.identity(gens[0].field, gens[0].n)
    elements = [identity]
    seen = {identity: 0}
    queue = deque([identity])
    while queue:
        current = queue.popleft()
        for g in gens:
            product = current * g
            if product in seen:
                continue
            seen[product] = len(elements)
            elements.append(product)
            queue.append(product)
            if len(elements) > cap:
                raise ExceedsCap(f"La clausura supera {cap} elementos", cap=cap)
            if len(elements) % 500 == 0:
                logger.debug(f"Clausura: {len(elements)} elementos")
    logger.info(f"Grupo cerrado con {len(elements)} elementos")
    return FiniteMatrixGroup(elements, [seen[g] for g in gens])


# ============================================================================
# INVARIANTES ESTRUCTURALES
# ============================================================================

@dataclass(frozen=True)
class StructureInvariants:
    order: int
    element_orders: tuple          # pares (orden, multiplicidad) ordenados
    is_abelian: bool
    abelian_invariants: tuple      # None si no es abeliano
    center_order: int
    derived_order: int
    class_count: int

    def compare(self, other):
        """Lista de campos en que difieren"""
        names = ['order', 'element_orders', 'is_abelian', 'abelian_invariants',
                 'center_order', 'derived_order', 'class_count']
        return [n for n in names if getattr(self, n) != getattr(other, n)]

    def to_json(self):
        return {
            'order': self.order,
            'element_orders': {str(k): v for k, v in self.element_orders},
            'is_abelian': self.is_abelian,
            'abelian_invariants': list(self.abelian_invariants) if self.abelian_invariants is not None else None,
            'center_order': self.center_order,
            'derived_order': self.derived_order,
            'class_count': self.class_count,
        }

    @classmethod
    def from_json(cls, data):
        invariants = data.get('abelian_invariants')
        return cls(
            order=data['order'],
            element_orders=tuple(sorted((int(k), v) for k, v in data['element_orders'].items())),
            is_abelian=data['is_abelian'],
            abelian_invariants=tuple(invariants) if invariants is not None else None,
            center_order=data['center_order'],
            derived_order=data['derived_order'],
            class_count=data['class_count'],
        )


def _abelian_invariants(orders):
    """Factores invariantes d1 | d2 | ... a partir de los órdenes de los elementos"""
    n = len(orders)
    chains = []
    for p in sympy.primefactors(n):
        exps = []
        k = 1
        previous = 0
        while True:
            count = sum(1 for o in orders if (p ** k) % o == 0)
            s_k = sympy.multiplicity(p, count)
            if s_k == previous:
                break
            exps.append(s_k - previous)   # cantidad de factores con exponente >= k
            previous = s_k
            k += 1
        # exps[k-1] = #{i : e_i >= k}; pasar a la partición
        parts = []
        for k, at_least in enumerate(exps, start=1):
            following = exps[k] if k < len(exps) else 0
            parts.extend([p ** k] * (at_least - following))
        chains.append(sorted(parts, reverse=True))
    length = max((len(c) for c in chains), default=0)
    factors = [1] * length
    for chain in chains:
        for i, q in enumerate(chain):
            factors[i] *= q
    return tuple(sorted(factors))


def table_invariants(table, identity):
    """Invariantes calculados solo con la tabla de Cayley"""
    n = len(table)
    inverse = [next(j for j in range(n) if table[i][j] == identity) for i in range(n)]

    orders = []
    for i in range(n):
        k, power = 1, i
        while power != identity:
            power = table[power][i]
            k += 1
        orders.append(k)

    is_abelian = all(table[i][j] == table[j][i] for i in range(n) for j in range(i + 1, n))
    center = [i for i in range(n) if all(table[i][j] == table[j][i] for j in range(n))]

    commutators = {table[table[inverse[a]][inverse[b]]][table[a][b]] for a in range(n) for b in range(n)}
    derived = {identity}
    frontier = list(derived)
    while frontier:
        nxt = []
        for x in frontier:
            for c in commutators:
                y = table[x][c]
                if y not in derived:
                    derived.add(y)
                    nxt.append(y)
        frontier = nxt

    unseen = set(range(n))
    classes = 0
    while unseen:
        g = unseen.pop()
        unseen -= {table[table[h][g]][inverse[h]] for h in range(n)}
        classes += 1

    return StructureInvariants(
        order=n,
        element_orders=tuple(sorted(Counter(orders).items())),
        is_abelian=is_abelian,
        abelian_invariants=_abelian_invariants(orders) if is_abelian else None,
        center_order=len(center),
        derived_order=len(derived),
        class_count=classes,
    )


def structure_invariants(group):
    return table_invariants(group.multiplication_table, group.identity_index)


def permutation_group_invariants(perm_group):
    """Los mismos invariantes para un grupo de permutaciones de sympy"""
    elements = list(perm_group.generate())
    index = {e: i for i, e in enumerate(elements)}
    table = [[index[a * b] for b in elements] for a in elements]
    identity = index[Permutation(list(range(perm_group.degree)))]
    return table_invariants(table, identity)


def _named_models():
    """Modelos de permutaciones de los grupos que aparecen en las tablas de automorfismos"""
    c = CyclicGroup
    return {
        'C1': lambda: PermutationGroup([Permutation([0])]),
        'C2': lambda: c(2),
        'C3': lambda: c(3),
        'C4': lambda: c(4),
        'C6': lambda: c(6),
        'C2^2': lambda: DirectProduct(c(2), c(2)),
        'C2^3': lambda: DirectProduct(c(2), c(2), c(2)),
        'C2^2xC6': lambda: DirectProduct(c(2), c(2), c(6)),
        'C2xC8': lambda: DirectProduct(c(2), c(8)),
        'C2xD4': lambda: DirectProduct(c(2), DihedralGroup(4)),
        'S3': lambda: SymmetricGroup(3),
        'D4': lambda: DihedralGroup(4),
        'C2xS3': lambda: DirectProduct(c(2), SymmetricGroup(3)),
        'C2^2xS3': lambda: DirectProduct(c(2), c(2), SymmetricGroup(3)),
        'C2xC6xS3': lambda: DirectProduct(c(2), c(6), SymmetricGroup(3)),
        'C3xS3': lambda: DirectProduct(c(3), SymmetricGroup(3)),
        'C4xS3': lambda: DirectProduct(c(4), SymmetricGroup(3)),
        'C6xS3': lambda: DirectProduct(c(6), SymmetricGroup(3)),
        'S4': lambda: SymmetricGroup(4),
        'C3xS4': lambda: DirectProduct(c(3), SymmetricGroup(4)),
        'A5': lambda: AlternatingGroup(5),
    }


_NAMED_CACHE = {}


def named_group_invariants(name):
    """Registro esperado para un grupo con nombre, construido desde su modelo"""
    if name not in _NAMED_CACHE:
        models = _named_models()
        if name not in models:
            raise KeyError(f"Grupo sin modelo de permutaciones: {name}")
        _NAMED_CACHE[name] = permutation_group_invariants(models[name]())
    return _NAMED_CACHE[name]


def identify(invariants):
    """Nombres del catálogo cuyos invariantes coinciden; más de uno es 'Inconclusive'"""
    return [name for name in _named_models() if named_group_invariants(name) == invariants]


# ============================================================================
# ACCIÓN SOBRE PUNTOS SINGULARES
# ============================================================================

def point_permutation(M, points):
    images = []
    for pt in points:
        image = transform_point(pt, M.change)
        if image not in points:
            raise NotStable(f"La imagen {image} no está entre los puntos dados", point=image)
        images.append(points.index(image))
    return tuple(images)


def permutation_cycles(perm):
    """Notación de ciclos con índices desde 1; la identidad es '()'"""
    seen = set()
    cycles = []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            seen.add(start)
            continue
        cycle = []
        i = start
        while i not in seen:
            seen.add(i)
            cycle.append(i + 1)
            i = perm[i]
        cycles.append('(' + ' '.join(str(c) for c in cycle) + ')')
    return ''.join(cycles) or '()'


def kernel(group, perms):
    """Subgrupo de elementos que fijan cada punto"""
    trivial = tuple(range(len(perms[0]))) if perms else ()
    members = [m for m, perm in zip(group.elements, perms) if perm == trivial]
    return FiniteMatrixGroup(members, list(range(len(members))))


def singular_point_action(group, points):
    """Permutación de cada elemento sobre los puntos y núcleo de la acción"""
    points = list(points)
    perms = [point_permutation(m, points) for m in group.elements]
    return perms, kernel(group, perms)
