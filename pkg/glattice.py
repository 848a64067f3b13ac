"""
G-retículos enteros y su cohomología.

Forma normal de Smith sobre matrices numpy de enteros de Python (dtype
object), complejo bar truncado para H^1 y H^2, caminos rápidos para grupos
cíclicos, y construcción de retículos a partir de presentaciones por planos
y relaciones.

Convención: las matrices de acción actúan sobre vectores columna y
action[g·h] = action[g] @ action[h]. La ley de un FinGroup que proviene de
un grupo de matrices es la composición de aplicaciones sobre puntos.
"""

import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from errors import TorsionQuotient, GroupTooLarge, NotAHomomorphism, NotStable, CohomologyMismatch
from multipoly import substitute_ideal, same_ideal_in_degrees

logger = logging.getLogger(__name__)

DEFAULT_BAR_LIMIT = 24
# Límite de filas del complejo bar para H^2 en grupos no cíclicos
H2_BAR_ROWS = 20000


def int_matrix(rows, shape=None):
    """Matriz numpy de enteros de precisión arbitraria"""
    matrix = np.array(rows, dtype=object)
    if shape is not None:
        matrix = matrix.reshape(shape)
    return matrix


def identity_matrix(n):
    return np.eye(n, dtype=int).astype(object)


# ============================================================================
# FORMA NORMAL DE SMITH
# ============================================================================

def smith_normal_form(A, return_inverse=False, track_left=True, divisibility=True):
    """
    Devuelve (U, D, V) con U·A·V = D diagonal, d1 | d2 | ..., entradas
    positivas y ceros al final. Con return_inverse también devuelve V^-1.
    Con track_left=False no se acumula U (se devuelve None); ahorra mucho
    en los diferenciales del complejo bar, que tienen muchas más filas.
    Con divisibility=False solo se diagonaliza (sin cadena de divisibilidad),
    suficiente para leer el rango y una base del núcleo.
    """
    D = int_matrix(A).copy()
    m, n = D.shape
    U = identity_matrix(m) if track_left else None
    V = identity_matrix(n)
    Vinv = identity_matrix(n)

    def swap_rows(i, j):
        if i != j:
            D[[i, j]] = D[[j, i]]
            if U is not None:
                U[[i, j]] = U[[j, i]]

    def swap_cols(i, j):
        if i != j:
            D[:, [i, j]] = D[:, [j, i]]
            V[:, [i, j]] = V[:, [j, i]]
            Vinv[[i, j]] = Vinv[[j, i]]

    for t in range(min(m, n)):
        while True:
            block = D[t:, t:]
            rows_nz, cols_nz = np.nonzero(block != 0)
            if rows_nz.size == 0:
                break
            sizes = [abs(block[i, j]) for i, j in zip(rows_nz, cols_nz)]
            k = int(np.argmin(sizes))
            swap_rows(t, t + int(rows_nz[k]))
            swap_cols(t, t + int(cols_nz[k]))
            pivot = D[t, t]

            # limpiar columna t
            q = np.array([x // pivot for x in D[t + 1:, t]], dtype=object)
            if q.size and q.any():
                D[t + 1:] -= np.outer(q, D[t])
                if U is not None:
                    U[t + 1:] -= np.outer(q, U[t])
            # limpiar fila t
            q = np.array([x // pivot for x in D[t, t + 1:]], dtype=object)
            if q.size and q.any():
                D[:, t + 1:] -= np.outer(D[:, t], q)
                V[:, t + 1:] -= np.outer(V[:, t], q)
                Vinv[t] += q.dot(Vinv[t + 1:])
            if (D[t + 1:, t] != 0).any() or (D[t, t + 1:] != 0).any():
                continue

            if not divisibility:
                break
            # el pivote debe dividir todo el resto
            rest = D[t + 1:, t + 1:]
            bad = [i for i in range(rest.shape[0]) if any(x % pivot for x in rest[i])]
            if bad:
                i = t + 1 + bad[0]
                D[t] += D[i]
                if U is not None:
                    U[t] += U[i]
                continue
            break
        if D[t, t] < 0:
            D[t] = -D[t]
            if U is not None:
                U[t] = -U[t]

    if return_inverse:
        return U, D, V, Vinv
    return U, D, V


def invariant_factors(A):
    """Entradas diagonales no nulas de la forma de Smith"""
    A = int_matrix(A)
    if A.size == 0:
        return []
    _, D, _ = smith_normal_form(A, track_left=False)
    return [int(D[i, i]) for i in range(min(D.shape)) if D[i, i] != 0]


def integer_rank(A):
    return len(invariant_factors(A))


@dataclass(frozen=True)
class FiniteAbelianGroup:
    invariant_factors: tuple

    def __post_init__(self):
        factors = tuple(int(d) for d in self.invariant_factors)
        if any(d < 2 for d in factors):
            raise ValueError(f"Factores invariantes inválidos: {factors}")
        if any(b % a for a, b in zip(factors, factors[1:])):
            raise ValueError(f"No se cumple la cadena de divisibilidad: {factors}")
        object.__setattr__(self, 'invariant_factors', factors)

    @classmethod
    def from_factors(cls, factors):
        return cls(tuple(sorted(int(abs(d)) for d in factors if abs(d) > 1)))

    @property
    def order(self):
        result = 1
        for d in self.invariant_factors:
            result *= d
        return result

    def is_trivial(self):
        return not self.invariant_factors

    def to_json(self):
        return list(self.invariant_factors)

    def __str__(self):
        if not self.invariant_factors:
            return '0'
        return ' x '.join(f"Z/{d}" for d in self.invariant_factors)


def _subquotient(kernel_of, image):
    """
    ker(kernel_of) / im(image) como grupo abeliano finito.
    'image' debe caer dentro del núcleo; la parte libre se reporta aparte.
    """
    _, D, V, Vinv = smith_normal_form(kernel_of, return_inverse=True,
                                      track_left=False, divisibility=False)
    rank = sum(1 for i in range(min(D.shape)) if D[i, i] != 0)
    dim_kernel = kernel_of.shape[1] - rank
    if dim_kernel == 0:
        return FiniteAbelianGroup(()), 0
    coords = Vinv.dot(image)
    if (coords[:rank] != 0).any():
        raise NotAHomomorphism("La imagen no está contenida en el núcleo del diferencial")
    factors = invariant_factors(coords[rank:]) if image.size else []
    free = dim_kernel - len(factors)
    return FiniteAbelianGroup.from_factors(factors), free


# ============================================================================
# GRUPOS FINITOS ABSTRACTOS
# ============================================================================

@dataclass
class FinGroup:
    """Grupo finito dado por su tabla de multiplicación"""

    table: list
    generator_labels: dict
    identity: int = 0

    def __post_init__(self):
        n = len(self.table)
        if any(len(row) != n for row in self.table):
            raise ValueError("La tabla de multiplicación no es cuadrada")
        if any(self.table[self.identity][g] != g or self.table[g][self.identity] != g for g in range(n)):
            raise ValueError("El elemento neutro declarado no es neutro")
        if n <= 64:
            t = self.table
            for a in range(n):
                for b in range(n):
                    ab = t[a][b]
                    for c in range(n):
                        if t[ab][c] != t[a][t[b][c]]:
                            raise ValueError("La tabla no es asociativa")

    @property
    def order(self):
        return len(self.table)

    @cached_property
    def inverse(self):
        n = self.order
        result = []
        for g in range(n):
            inv = next((h for h in range(n) if self.table[g][h] == self.identity), None)
            if inv is None:
                raise ValueError(f"El elemento {g} no tiene inverso")
            result.append(inv)
        return result

    def element_order(self, g):
        k, power = 1, g
        while power != self.identity:
            power = self.table[power][g]
            k += 1
        return k

    def cyclic_generator(self):
        """Un generador si el grupo es cíclico, si no None"""
        return next((g for g in range(self.order) if self.element_order(g) == self.order), None)


def cyclic_group(m, label='g'):
    """C_m con generador 1"""
    table = [[(i + j) % m for j in range(m)] for i in range(m)]
    return FinGroup(table, {label: 1 % m}, 0)


def fin_group_from_matrix_group(group, labels=None):
    """
    FinGroup desde un FiniteMatrixGroup. La ley es la composición de
    aplicaciones: (g·h)(p) = g(h(p)), es decir la matriz H*G.
    """
    n = group.order
    base = group.multiplication_table
    table = [[base[j][i] for j in range(n)] for i in range(n)]
    labels = labels or [f"g{k}" for k in range(len(group.generators))]
    generator_labels = {label: idx for label, idx in zip(labels, group.generators)}
    return FinGroup(table, generator_labels, group.identity_index)


# ============================================================================
# G-RETÍCULOS
# ============================================================================

@dataclass
class GLattice:
    group: FinGroup
    rank: int
    action: list          # una matriz rank x rank por elemento

    def __post_init__(self):
        self.action = [int_matrix(a, (self.rank, self.rank)) for a in self.action]
        if len(self.action) != self.group.order:
            raise NotAHomomorphism("Falta la acción de algún elemento del grupo")
        t = self.group.table
        n = self.group.order
        for g in range(n):
            for h in range(n):
                if not np.array_equal(self.action[t[g][h]], self.action[g].dot(self.action[h])):
                    raise NotAHomomorphism(
                        f"La acción no es un homomorfismo en el par ({g}, {h})", pair=(g, h))

    def generator_matrix(self, label):
        return self.action[self.group.generator_labels[label]]


def lattice_from_generators(group, generator_actions, rank):
    """
    Extiende la acción de los generadores a todo el grupo recorriendo en
    anchura y verifica que el resultado sea un homomorfismo.
    """
    n = group.order
    action = [None] * n
    action[group.identity] = identity_matrix(rank)
    matrices = {}
    for label, idx in group.generator_labels.items():
        if label not in generator_actions:
            raise NotAHomomorphism(f"Falta la acción del generador {label}", generator=label)
        matrices[idx] = int_matrix(generator_actions[label], (rank, rank))
    queue = deque([group.identity])
    while queue:
        x = queue.popleft()
        for s, ms in matrices.items():
            y = group.table[s][x]
            candidate = ms.dot(action[x])
            if action[y] is None:
                action[y] = candidate
                queue.append(y)
            elif not np.array_equal(action[y], candidate):
                raise NotAHomomorphism("Las acciones de los generadores no respetan las relaciones del grupo")
    if any(a is None for a in action):
        raise NotAHomomorphism("Los generadores no generan el grupo")
    return GLattice(group, rank, action)


def permutation_matrix(perm):
    """Matriz columna con P·e_k = e_perm[k]"""
    n = len(perm)
    matrix = identity_matrix(n) * 0
    for k, image in enumerate(perm):
        matrix[image, k] = 1
    return matrix


def permutation_module(group, generator_perms):
    """Retículo de permutaciones: generator_perms da la imagen de cada índice"""
    degree = len(next(iter(generator_perms.values())))
    actions = {label: permutation_matrix(perm) for label, perm in generator_perms.items()}
    return lattice_from_generators(group, actions, degree)


def dual_lattice(lattice):
    """Acción inversa-transpuesta: ρ*(g) = ρ(g^-1)^T"""
    inverse = lattice.group.inverse
    action = [lattice.action[inverse[g]].T.copy() for g in range(lattice.group.order)]
    return GLattice(lattice.group, lattice.rank, action)


def conjugate_lattice(lattice, P, P_inv):
    """Cambio de base unimodular: ρ'(g) = P^-1 ρ(g) P"""
    action = [int_matrix(P_inv).dot(a).dot(int_matrix(P)) for a in lattice.action]
    return GLattice(lattice.group, lattice.rank, action)


# ============================================================================
# PRESENTACIONES POR GENERADORES Y RELACIONES
# ============================================================================

@dataclass
class FPLattice:
    """
    Z^ambient módulo las filas de 'relations'. Cada acción viene por
    filas: la fila i es la imagen del i-ésimo generador del ambiente.
    """

    ambient_rank: int
    relations: list
    actions: dict
    labels: list = None

    def relation_matrix(self):
        if not self.relations:
            return int_matrix([], (0, self.ambient_rank))
        return int_matrix(self.relations, (len(self.relations), self.ambient_rank))


def quotient_basis(presentation):
    """
    (k, V, Vinv): las filas k.. de Vinv son una base del cociente y x·V da
    las coordenadas de x en la base de filas de Vinv.
    """
    relations = presentation.relation_matrix()
    a = presentation.ambient_rank
    if relations.shape[0] == 0:
        return 0, identity_matrix(a), identity_matrix(a)
    _, D, V, Vinv = smith_normal_form(relations, return_inverse=True)
    factors = [int(D[i, i]) for i in range(min(D.shape)) if D[i, i] != 0]
    torsion = [d for d in factors if d > 1]
    if torsion:
        raise TorsionQuotient(f"El cociente tiene torsión: factores {torsion}", factors=torsion)
    return len(factors), V, Vinv


def quotient_lattice(presentation, group):
    """G-retículo inducido en el cociente (sin torsión) de la presentación"""
    k, V, Vinv = quotient_basis(presentation)
    relations = presentation.relation_matrix()
    rank = presentation.ambient_rank - k
    generator_actions = {}
    for label in group.generator_labels:
        if label not in presentation.actions:
            raise NotAHomomorphism(f"La presentación no define la acción de {label}", generator=label)
        rows = int_matrix(presentation.actions[label],
                          (presentation.ambient_rank, presentation.ambient_rank))
        # las relaciones deben ir a relaciones
        if relations.shape[0]:
            moved = relations.dot(rows).dot(V)
            if (moved[:, k:] != 0).any():
                raise NotStable(f"La acción de {label} no preserva las relaciones", generator=label)
        images = Vinv[k:].dot(rows).dot(V)[:, k:]
        # fila j = imagen del j-ésimo básico; pasar a convención de columnas
        generator_actions[label] = images.T.copy()
    logger.debug(f"Cociente de rango {rank} con {len(generator_actions)} generadores")
    return lattice_from_generators(group, generator_actions, rank)


def plane_permutation(change, planes):
    """
    Permutación inducida sobre planos (listas de formas lineales) por la
    transformación de puntos p ↦ p·M: el ideal de g(Π) es I(Π)(x·M^-1).
    """
    inverse = change.inverse()
    perm = []
    for gens in planes:
        moved = substitute_ideal(gens, inverse)
        target = next((j for j, other in enumerate(planes)
                       if same_ideal_in_degrees(moved, other, [1])), None)
        if target is None:
            raise NotStable("La imagen de un plano no está en la lista")
        perm.append(target)
    return perm


def plane_action_rows(change, planes, ambient_rank):
    """Filas de la acción en el ambiente: planos permutados, resto fijo"""
    perm = plane_permutation(change, planes)
    rows = identity_matrix(ambient_rank)
    for k, target in enumerate(perm):
        rows[k] = 0
        rows[k, target] = 1
    return rows


# ============================================================================
# COHOMOLOGÍA
# ============================================================================

def _check_size(group, limit):
    if group.order > limit:
        raise GroupTooLarge(f"El grupo tiene orden {group.order} > {limit}", order=group.order)


def _d0(lattice):
    n, r = lattice.group.order, lattice.rank
    blocks = [lattice.action[g] - identity_matrix(r) for g in range(n)]
    return np.vstack(blocks)


def _d1(lattice):
    n, r = lattice.group.order, lattice.rank
    t = lattice.group.table
    d = np.zeros((n * n * r, n * r), dtype=object)
    ident = identity_matrix(r)
    for g in range(n):
        for h in range(n):
            row = (g * n + h) * r
            d[row:row + r, h * r:(h + 1) * r] += lattice.action[g]
            d[row:row + r, t[g][h] * r:(t[g][h] + 1) * r] -= ident
            d[row:row + r, g * r:(g + 1) * r] += ident
    return d


def _d2(lattice):
    n, r = lattice.group.order, lattice.rank
    t = lattice.group.table
    d = np.zeros((n ** 3 * r, n * n * r), dtype=object)
    ident = identity_matrix(r)
    for g in range(n):
        for h in range(n):
            for k in range(n):
                row = ((g * n + h) * n + k) * r

                def block(a, b):
                    col = (a * n + b) * r
                    return slice(col, col + r)
                # (dφ)(g,h,k) = gφ(h,k) - φ(gh,k) + φ(g,hk) - φ(g,h)
                d[row:row + r, block(h, k)] += lattice.action[g]
                d[row:row + r, block(t[g][h], k)] -= ident
                d[row:row + r, block(g, t[h][k])] += ident
                d[row:row + r, block(g, h)] -= ident
    return d


def h0_rank(lattice):
    """Rango del subretículo de invariantes"""
    if lattice.rank == 0:
        return 0
    return lattice.rank - integer_rank(_d0(lattice))


def h1_bar(lattice, limit=DEFAULT_BAR_LIMIT):
    _check_size(lattice.group, limit)
    result, free = _subquotient(_d1(lattice), _d0(lattice))
    if free:
        logger.warning(f"H^1 con parte libre {free}: revisar la acción")
    return result


def h1_cyclic(lattice, generator=None):
    """H^1 de un grupo cíclico: ker N / im(σ - 1)"""
    sigma, norm = _cyclic_data(lattice, generator)
    result, _ = _subquotient(norm, sigma - identity_matrix(lattice.rank))
    return result


def h2_bar(lattice, limit=DEFAULT_BAR_LIMIT):
    _check_size(lattice.group, limit)
    n = lattice.group.order
    if n ** 3 * lattice.rank > H2_BAR_ROWS:
        raise GroupTooLarge(f"Complejo bar demasiado grande para H^2 (orden {n})", order=n)
    result, _ = _subquotient(_d2(lattice), _d1(lattice))
    return result


def h2_cyclic(lattice, generator=None):
    """H^2 de un grupo cíclico: M^G / N·M"""
    sigma, norm = _cyclic_data(lattice, generator)
    result, _ = _subquotient(sigma - identity_matrix(lattice.rank), norm)
    return result


def _cyclic_data(lattice, generator):
    group = lattice.group
    if generator is None:
        generator = group.cyclic_generator()
    if generator is None:
        raise ValueError("El grupo no es cíclico")
    if group.element_order(generator) != group.order:
        raise ValueError("El elemento no genera el grupo")
    sigma = lattice.action[generator]
    norm = identity_matrix(lattice.rank) * 0
    power = identity_matrix(lattice.rank)
    for _ in range(group.order):
        norm = norm + power
        power = sigma.dot(power)
    return sigma, norm


def _raise_mismatch(degree, first, second, order):
    raise CohomologyMismatch(
        f"H^{degree}: los dos cálculos no coinciden ({first} frente a {second})",
        degree=degree, first=first, second=second, order=order)


def h1(group, lattice, limit=DEFAULT_BAR_LIMIT):
    """H^1 por el complejo bar; en grupos cíclicos se contrasta con el camino rápido"""
    if lattice.group is not group:
        raise ValueError("El retículo no está definido sobre este grupo")
    if lattice.rank == 0:
        return FiniteAbelianGroup(())
    generator = group.cyclic_generator()
    if group.order > limit:
        if generator is None:
            _check_size(group, limit)
        return h1_cyclic(lattice, generator)
    result = h1_bar(lattice, limit)
    if generator is not None:
        fast = h1_cyclic(lattice, generator)
        if fast != result:
            _raise_mismatch(1, result, fast, group.order)
    return result


# ============================================================================
# MÓDULOS DE PERMUTACIONES (LEMA DE SHAPIRO)
# ============================================================================

def _as_permutation(matrix):
    """La permutación k -> perm[k] si la matriz es de permutación, si no None"""
    n = matrix.shape[0]
    perm = []
    for k in range(n):
        column = matrix[:, k]
        support = [i for i in range(n) if column[i] != 0]
        if len(support) != 1 or column[support[0]] != 1:
            return None
        perm.append(support[0])
    return tuple(perm)


def permutation_action(lattice):
    """Permutaciones de la base para cada elemento, o None si la acción no permuta la base"""
    perms = []
    for matrix in lattice.action:
        perm = _as_permutation(matrix)
        if perm is None:
            return None
        perms.append(perm)
    return perms


def _generated(group, gens):
    seen = {group.identity}
    queue = deque([group.identity])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = group.table[x][s]
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def abelianization(group, elements):
    """
    H/[H,H] para el subgrupo H dado por sus índices: Z^H módulo las
    relaciones e_a + e_s = e_as con s en un sistema de generadores de H.
    """
    elements = sorted(elements)
    position = {g: i for i, g in enumerate(elements)}
    gens, span = [], {group.identity}
    for g in elements:
        if g not in span:
            gens.append(g)
            span = _generated(group, gens)
    if not gens:
        return FiniteAbelianGroup(())
    relations = np.zeros((len(elements) * len(gens) + 1, len(elements)), dtype=object)
    relations[0, position[group.identity]] = 1
    row = 1
    for a in elements:
        for s in gens:
            relations[row, position[a]] += 1
            relations[row, position[s]] += 1
            relations[row, position[group.table[a][s]]] -= 1
            row += 1
    factors = invariant_factors(relations)
    if len(factors) != len(elements):
        raise NotAHomomorphism("Los índices dados no forman un subgrupo")
    return FiniteAbelianGroup.from_factors(factors)


def h2_permutation(lattice):
    """
    H^2 de un módulo de permutaciones como suma sobre las órbitas de
    H^2(Stab, Z) = Hom(Stab, Q/Z), isomorfo a la abelianización del estabilizador.
    """
    perms = permutation_action(lattice)
    if perms is None:
        raise ValueError("La acción no permuta la base del retículo")
    group = lattice.group
    factors = []
    seen = set()
    for x in range(lattice.rank):
        if x in seen:
            continue
        seen.update(perm[x] for perm in perms)
        stabilizer = [g for g in range(group.order) if perms[g][x] == x]
        factors.extend(abelianization(group, stabilizer).invariant_factors)
    if not factors:
        return FiniteAbelianGroup(())
    return FiniteAbelianGroup.from_factors(invariant_factors(np.diag(np.array(factors, dtype=object))))


def h2(group, lattice, limit=DEFAULT_BAR_LIMIT):
    """
    H^2. Los módulos de permutaciones van por órbitas y estabilizadores, los
    grupos cíclicos por M^G / N·M, y el complejo bar contrasta cuando cabe.
    """
    if lattice.group is not group:
        raise ValueError("El retículo no está definido sobre este grupo")
    if lattice.rank == 0:
        return FiniteAbelianGroup(())
    generator = group.cyclic_generator()
    n = group.order
    if permutation_action(lattice) is not None:
        result = h2_permutation(lattice)
        if generator is not None:
            fast = h2_cyclic(lattice, generator)
            if fast != result:
                _raise_mismatch(2, result, fast, n)
        return result
    if generator is not None:
        result = h2_cyclic(lattice, generator)
        if n <= limit and n ** 3 * lattice.rank <= H2_BAR_ROWS:
            bar = h2_bar(lattice, limit)
            if bar != result:
                _raise_mismatch(2, bar, result, n)
        return result
    return h2_bar(lattice, limit)
