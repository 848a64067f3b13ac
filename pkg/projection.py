"""
Método de proyección desde un punto singular q = [1:0:0:0:0].

Se escribe la cúbica como f = x1·f2 + f3, se lee el rango de la cuádrica,
se verifica una descomposición declarada de la curva C_q = {f2 = f3 = 0}
en P^3 y se aplica la fórmula del defecto.
"""

import logging
from dataclasses import dataclass, field as dc_field

from errors import NotAtOrigin, HasX1Square, FormulaNotApplicable, UnresolvedClass
from numfield import find_prime_field, matrix_rank
from multipoly import (
    MultiPoly, LinearChange, substitute, substitute_ideal, graded_membership,
    same_ideal_in_degrees, reduce_poly_mod,
)
from singularities import (
    coordinate_point, transform_point, classify_ade, modp_zero_locus, DEFAULT_TRUNCATION,
)
from degeneration import parse_config

logger = logging.getLogger(__name__)

VERIFIED = 'Verified'
REFUTED = 'Refuted'
INCONCLUSIVE = 'Inconclusive'


@dataclass
class ProjectionData:
    q_type: object
    f2: MultiPoly
    f3: MultiPoly
    moved_cubic: MultiPoly = None

    def to_json(self):
        return {'q_type': str(self.q_type), 'f2': str(self.f2), 'f3': str(self.f3)}


@dataclass
class ComponentClaim:
    """Ideales de las componentes de C_q, con generadores libres de x1"""

    components: list
    expected_defect: int = None

    def __post_init__(self):
        if not self.components:
            raise ValueError("Una descomposición necesita al menos una componente")
        for gens in self.components:
            if not gens or all(g.is_zero() for g in gens):
                raise ValueError("Ideal de componente nulo")


def split_at_origin(f):
    """f = x1·f2 + f3 con f2, f3 libres de x1"""
    f2, f3 = {}, {}
    for exp, c in f.terms.items():
        if exp[0] == 0:
            f3[exp] = c
        elif exp[0] == 1:
            f2[(0,) + exp[1:]] = c
        else:
            raise HasX1Square("La cúbica contiene x1^2: el origen no es singular", exp=exp)
    return MultiPoly(f.field, f2, f.nvars), MultiPoly(f.field, f3, f.nvars)


def extract_projection(f, q, move=None, truncation=DEFAULT_TRUNCATION):
    """
    Lleva q al origen con 'move' (acción de puntos p ↦ p·M) y separa la
    cúbica trasladada f(x·M^-1) como x1·f2 + f3.
    """
    field = f.field
    move = move or LinearChange.identity(field, f.nvars)
    origin = coordinate_point(1, field, f.nvars)
    if transform_point(q, move) != origin:
        raise NotAtOrigin(f"El cambio no lleva {q} a [1:0:0:0:0]", point=q)
    moved = substitute(f, move.inverse())
    f2, f3 = split_at_origin(moved)
    q_type = classify_ade(moved, origin, truncation).type
    logger.debug(f"Proyección desde {q}: tipo {q_type}, f2 = {f2}")
    return ProjectionData(q_type, f2, f3, moved)


def gram_matrix(quadric):
    """Matriz simétrica con x·G·x^T = quadric (característica 0)"""
    n = quadric.nvars
    field = quadric.field
    gram = [[field.zero] * n for _ in range(n)]
    half = field(1) / 2
    for exp, c in quadric.terms.items():
        idx = [i for i, a in enumerate(exp) for _ in range(a)]
        i, j = idx
        if i == j:
            gram[i][i] = c
        else:
            gram[i][j] = c * half
            gram[j][i] = c * half
    return gram


def qq_rank(f2):
    """Rango de la cuádrica f2 (1..4 para los casos de interés)"""
    if not f2.is_homogeneous(2):
        raise ValueError(f"f2 no es una cuádrica: {f2}")
    return matrix_rank(gram_matrix(f2))


def defect_from_components(q_type, n):
    """D4: n - 2; A_n con n >= 2: n - 1"""
    if q_type.family == 'D' and q_type.index == 4:
        return n - 2
    if q_type.family == 'A' and q_type.index >= 2:
        return n - 1
    raise FormulaNotApplicable(f"La fórmula del defecto no aplica a {q_type}", q_type=q_type)


# ============================================================================
# VERIFICACIÓN DE DESCOMPOSICIONES
# ============================================================================

def _drop_first_variable(poly):
    if any(e[0] for e in poly.terms):
        raise ValueError(f"El polinomio depende de x1: {poly}")
    return MultiPoly(poly.field, {e[1:]: c for e, c in poly.terms.items()}, poly.nvars - 1)


@dataclass
class DecompositionResult:
    verdict: str
    membership: list
    primes: list = dc_field(default_factory=list)
    flags: list = dc_field(default_factory=list)

    def to_json(self):
        return {
            'verdict': self.verdict,
            'membership': self.membership,
            'primes': self.primes,
            'flags': self.flags,
        }


def _covering_check(pd, claim, p):
    """Puntos F_p de V(f2, f3) frente a la unión de las componentes, en P^3"""
    pf = find_prime_field(pd.f2.field, p)
    curve = [reduce_poly_mod(_drop_first_variable(g), pf) for g in (pd.f2, pd.f3)]
    nvars = pd.f2.nvars - 1
    curve_points = set(modp_zero_locus(curve, p, nvars))
    union = set()
    for gens in claim.components:
        reduced = [reduce_poly_mod(_drop_first_variable(g), pf) for g in gens if not g.is_zero()]
        union.update(modp_zero_locus(reduced, p, nvars))
    escaped = sorted(curve_points - union)
    extra = sorted(union - curve_points)
    return {
        'prime': p,
        'curve_points': len(curve_points),
        'union_points': len(union),
        'match': not escaped and not extra,
        'escaped': [list(pt) for pt in escaped[:5]],
        'extra': [list(pt) for pt in extra[:5]],
    }


def verify_decomposition(pd, claim, primes, dmax=3):
    """
    Verified si f2 y f3 están en cada ideal componente (grados 2 y 3) y en
    cada primo los puntos de C_q coinciden con la unión de las componentes.
    """
    degrees = [d for d in (2, 3) if d <= dmax]
    membership = []
    for gens in claim.components:
        inside = all(graded_membership(g, gens, d)
                     for g, d in ((pd.f2, 2), (pd.f3, 3)) if d in degrees)
        membership.append(inside)

    flags = ['saturation_assumed']
    if len(primes) == 1:
        flags.append('single_prime')

    if not all(membership):
        logger.info("Alguna componente no está contenida en C_q")
        return DecompositionResult(REFUTED, membership, [], flags)
    if not primes:
        return DecompositionResult(INCONCLUSIVE, membership, [], flags)

    checks = [_covering_check(pd, claim, p) for p in primes]
    verdict = VERIFIED if all(c['match'] for c in checks) else REFUTED
    logger.info(f"Descomposición en {len(claim.components)} componentes: {verdict}")
    return DecompositionResult(verdict, membership, checks, flags)


def defect_from_claim(f, q, claim, primes, move=None, truncation=DEFAULT_TRUNCATION):
    """Extrae la proyección, verifica la descomposición y calcula el defecto"""
    pd = extract_projection(f, q, move, truncation)
    result = verify_decomposition(pd, claim, primes)
    defect = None
    if result.verdict != REFUTED:
        defect = defect_from_components(pd.q_type, len(claim.components))
    return {
        'q_type': str(pd.q_type),
        'qq_rank': qq_rank(pd.f2),
        'components': len(claim.components),
        'defect': defect,
        'verification': result.to_json(),
        'expected_defect': claim.expected_defect,
        'ok': result.verdict == VERIFIED and (claim.expected_defect is None
                                              or defect == claim.expected_defect),
    }


# ============================================================================
# ACCIÓN SOBRE CLASES DE CONOS
# ============================================================================

def cone_class(change, cone, cones, linking_quadrics):
    """
    Clase de g(R̂) para la transformación de puntos p ↦ p·M:
    ('cone', j) si coincide con el cono R̂_j, ('residual', j) si la cuádrica
    Q_j lo contiene (clase 2H - R̂_j).
    """
    moved = substitute_ideal(cone, change.inverse())
    degrees = sorted({g.degree() for g in moved if not g.is_zero()})
    for j, other in enumerate(cones):
        if same_ideal_in_degrees(moved, other, degrees):
            return ('cone', j)
    for j, quadric in enumerate(linking_quadrics):
        if quadric is None:
            continue
        if graded_membership(quadric, moved, 2) and not same_ideal_in_degrees(moved, cones[j], degrees):
            return ('residual', j)
    raise UnresolvedClass("No se pudo identificar la clase de la imagen del cono")


def component_class_action(change, cones, linking_quadrics, basis, cone_classes, hyperplane_class):
    """
    Filas enteras de la acción sobre Cl(X) en la base dada. 'basis' es una
    lista con 'H' o índices de conos; cone_classes[j] es el vector de R̂_j.
    """
    rows, explanation = [], []
    for item in basis:
        if item == 'H':
            rows.append(list(hyperplane_class))
            explanation.append('H -> H')
            continue
        kind, j = cone_class(change, cones[item], cones, linking_quadrics)
        if kind == 'cone':
            rows.append(list(cone_classes[j]))
            explanation.append(f"R{item + 1} -> R{j + 1}")
        else:
            rows.append([2 * h - c for h, c in zip(hyperplane_class, cone_classes[j])])
            explanation.append(f"R{item + 1} -> 2H - R{j + 1}")
    return rows, explanation


# Valores del defecto de la lista de degeneraciones; los conjuntos indican
# que el defecto depende de la geometría concreta
DEFECT_VALUES = {
    '2A2': {0}, '3A2': {0}, '4A2': {0}, '5A2': {0},
    '2A2+2A1': {0}, '2A2+3A1': {0}, '2A2+4A1': {1},
    '2A3': {0, 1}, '2A3+2A1': {1, 2}, '2A3+3A1': {2}, '2A3+4A1': {3},
    '2A4': {0}, '2A5': {1}, '3A2+2A1': {0}, '3A3': {1, 2},
    '2D4': {2}, '2D4+2A1': {3}, '2D4+3A1': {4}, '3D4': {4},
}


def defect_table():
    """Configuración -> valores admisibles del defecto"""
    return {parse_config(k): set(v) for k, v in DEFECT_VALUES.items()}
