"""
Puntos singulares de cúbicas en P^4: verificación, clasificación ADE por
corango del hessiano y lema de separación truncado, y barrido exhaustivo
módulo p como oráculo independiente.
"""

import logging
from dataclasses import dataclass

import numpy as np

from errors import NotSingular, TruncationInsufficient, UnsupportedType, BadPrime, DimensionMismatch
from numfield import find_prime_field, reduce_mod
from multipoly import MultiPoly, LinearChange, substitute_forms, reduce_poly_mod
from degeneration import ADEType, SingConfig

logger = logging.getLogger(__name__)

DEFAULT_TRUNCATION = 8
MAX_A_INDEX = 7

# Convención de carta usada en todos los reportes
CHART_CONVENTION = 'first-nonzero-coordinate'


@dataclass(frozen=True)
class ProjPoint:
    """Punto proyectivo con la primera coordenada no nula igual a 1"""

    coords: tuple

    @classmethod
    def make(cls, coords, field):
        values = [field(c) for c in coords]
        lead = next((c for c in values if c), None)
        if lead is None:
            raise ValueError("Un punto proyectivo necesita alguna coordenada no nula")
        inv = lead.inverse()
        return cls(tuple(c * inv for c in values))

    @property
    def chart(self):
        """Índice (desde 1) de la primera coordenada no nula"""
        return next(i for i, c in enumerate(self.coords) if c) + 1

    def to_json(self):
        return [c.to_json() for c in self.coords]

    def __str__(self):
        return '[' + ':'.join(str(c) for c in self.coords) + ']'


def coordinate_point(i, field, n=5):
    """El punto coordenado p_i"""
    return ProjPoint.make([1 if j == i - 1 else 0 for j in range(n)], field)


def transform_point(point, T):
    """Acción p ↦ p·M renormalizada"""
    return ProjPoint.make(T.apply_point(point.coords), T.field)


@dataclass
class SingularReport:
    point: ProjPoint
    type: ADEType
    chart: int
    residual_order: int
    corank: int

    def to_json(self):
        return {
            'point': self.point.to_json(),
            'type': str(self.type),
            'chart': self.chart,
            'chart_convention': CHART_CONVENTION,
            'corank': self.corank,
            'residual_order': self.residual_order,
        }


def is_singular_at(f, point):
    """Todas las derivadas parciales se anulan en el punto"""
    if len(point.coords) != f.nvars:
        raise DimensionMismatch("El punto y el polinomio tienen dimensiones distintas", nvars=f.nvars)
    return all(not df.evaluate(point.coords) for df in f.gradient())


# ============================================================================
# CLASIFICACIÓN LOCAL
# ============================================================================

def local_germ(f, point):
    """
    Deshomogeneiza en la carta de la primera coordenada no nula y traslada
    el punto al origen. Devuelve un polinomio en nvars-1 variables.
    """
    field = f.field
    n = f.nvars
    chart = point.chart - 1
    forms = []
    k = 0
    for j in range(n):
        if j == chart:
            forms.append(MultiPoly.constant(field, 1, n - 1))
        else:
            forms.append(MultiPoly.variable(field, k + 1, n - 1) + point.coords[j])
            k += 1
    return substitute_forms(f, forms)


def _drop_variable(g, i):
    """Quita la variable i (desde 0), que ya no aparece en g"""
    terms = {e[:i] + e[i + 1:]: c for e, c in g.terms.items()}
    return MultiPoly(g.field, terms, g.nvars - 1)


def _make_square_term(g, quadratic):
    """
    Elige una variable con coeficiente no nulo en su cuadrado. Si la parte
    cuadrática solo tiene productos cruzados, cambia y_i = u+v, y_j = u-v.
    """
    m = g.nvars
    for i in range(m):
        exp = tuple(2 if k == i else 0 for k in range(m))
        if quadratic.coefficient(exp):
            return g, i
    for exp in sorted(quadratic.terms, reverse=True):
        i, j = [k for k, a in enumerate(exp) if a]
        ys = [MultiPoly.variable(g.field, k + 1, m) for k in range(m)]
        forms = list(ys)
        forms[i] = ys[i] + ys[j]
        forms[j] = ys[i] - ys[j]
        return substitute_forms(g, forms), i
    raise AssertionError("parte cuadrática vacía")


def split_variable(g, i, truncation):
    """
    Lema de separación en la dirección i: resuelve ∂g/∂y_i = 0 para
    y_i = φ(resto) por iteración de punto fijo truncada y devuelve el
    residuo g(φ, resto) sin la variable i.
    """
    m = g.nvars
    square = tuple(2 if k == i else 0 for k in range(m))
    c = g.coefficient(square)
    ys = [MultiPoly.variable(g.field, k + 1, m) for k in range(m)]
    # y_i = -(∂g/∂y_i - 2c y_i) / (2c)
    rest = (g.partial(i + 1) - ys[i].scale(2 * c)).scale(-(2 * c).inverse())
    phi = MultiPoly.zero(g.field, m)
    for _ in range(truncation + 1):
        forms = list(ys)
        forms[i] = phi
        new_phi = substitute_forms(rest, forms, truncation).truncate(truncation)
        if new_phi == phi:
            break
        phi = new_phi
    forms = list(ys)
    forms[i] = phi
    residual = substitute_forms(g, forms, truncation).truncate(truncation)
    return _drop_variable(residual, i)


def _univariate_gcd_degree(coeffs):
    """Grado de gcd(u, u') para u dado de grado alto a bajo"""
    def trim(p):
        while p and not p[0]:
            p = p[1:]
        return p

    def remainder(a, b):
        a = list(a)
        while a and len(a) >= len(b):
            if a[0]:
                factor = a[0] / b[0]
                for k in range(len(b)):
                    a[k] = a[k] - factor * b[k]
            a = a[1:]
        return trim(a)

    u = trim(list(coeffs))
    n = len(u) - 1
    du = trim([u[k] * (n - k) for k in range(n)])
    a, b = u, du
    while b:
        a, b = b, remainder(a, b)
    return len(a) - 1


def binary_cubic_squarefree(cubic):
    """¿La cúbica binaria tiene tres factores lineales distintos?"""
    a = cubic.coefficient((3, 0))
    b = cubic.coefficient((2, 1))
    c = cubic.coefficient((1, 2))
    d = cubic.coefficient((0, 3))
    if not a and not d:
        return bool(b) and bool(c)
    if not a:
        a, b, c, d = d, c, b, a
    return _univariate_gcd_degree([a, b, c, d]) == 0


def classify_ade(f, point, truncation=DEFAULT_TRUNCATION):
    """Tipo ADE del punto singular mediante el lema de separación truncado"""
    if not is_singular_at(f, point):
        raise NotSingular(f"El punto {point} no es singular", point=point)
    g = local_germ(f, point)
    if g.homogeneous_part(1):
        raise NotSingular(f"El germen en {point} tiene parte lineal", point=point)

    eliminated = 0
    while g.nvars > 0:
        quadratic = g.homogeneous_part(2)
        if quadratic.is_zero():
            break
        g, i = _make_square_term(g, quadratic)
        g = split_variable(g, i, truncation)
        eliminated += 1

    corank = g.nvars
    chart = point.chart
    logger.debug(f"Punto {point}: corango {corank} tras eliminar {eliminated} variables")

    if corank == 0:
        return SingularReport(point, ADEType('A', 1), chart, 2, corank)
    if corank == 1:
        if g.is_zero():
            raise TruncationInsufficient(
                f"El residuo se anula hasta grado {truncation}", point=point, truncation=truncation)
        k = g.min_degree()
        if k - 1 > MAX_A_INDEX:
            raise UnsupportedType(f"Tipo A{k - 1} fuera del rango soportado", point=point)
        return SingularReport(point, ADEType('A', k - 1), chart, k, corank)
    if corank == 2:
        cubic = g.homogeneous_part(3)
        if not cubic.is_zero() and binary_cubic_squarefree(cubic):
            return SingularReport(point, ADEType('D', 4), chart, 3, corank)
        raise UnsupportedType(f"Corango 2 que no es D4 en {point}", point=point)
    raise UnsupportedType(f"Corango {corank} no soportado en {point}", point=point)


def singular_configuration(f, points, truncation=DEFAULT_TRUNCATION):
    """Clasifica cada punto declarado y arma la configuración"""
    reports = [classify_ade(f, p, truncation) for p in points]
    return reports, SingConfig.of(r.type for r in reports)


def move_to_origin(point):
    """
    Cambio T con point·T = [1:0:0:0:0]. La cúbica trasladada es
    substitute(f, T.inverse()).
    """
    field = point.coords[0].field
    n = len(point.coords)
    chart = point.chart - 1
    rows = [list(point.coords)]
    for j in range(n):
        if j != chart:
            rows.append([1 if k == j else 0 for k in range(n)])
    # rows es N con e1·N = point; T = N^-1
    return LinearChange(field, rows).inverse()


# ============================================================================
# BARRIDO MÓDULO p
# ============================================================================

def _grid(p, k):
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.stack(np.meshgrid(*[np.arange(p, dtype=np.int64)] * k, indexing='ij'),
                    axis=-1).reshape(-1, k)


def projective_points(p, n):
    """
    Todos los puntos de P^{n-1}(F_p) normalizados, en bloques: cada bloque
    fija la primera coordenada no nula y, si hay espacio, la siguiente.
    """
    for lead in range(n):
        free = n - lead - 1
        if free <= 1:
            blocks = [(None, _grid(p, free))]
        else:
            tail = _grid(p, free - 1)
            blocks = [(v, tail) for v in range(p)]
        for first, grid in blocks:
            points = np.zeros((grid.shape[0], n), dtype=np.int64)
            points[:, lead] = 1
            if first is None:
                points[:, lead + 1:] = grid
            else:
                points[:, lead + 1] = first
                points[:, lead + 2:] = grid
            yield lead, points


def modp_zero_locus(polys, p, n):
    """Puntos de P^{n-1}(F_p) donde se anulan todos los ModPPoly dados"""
    found = []
    per_chart = [0] * n
    for lead, points in projective_points(p, n):
        mask = np.ones(points.shape[0], dtype=bool)
        for poly in polys:
            if not mask.any():
                break
            idx = np.flatnonzero(mask)
            values = poly.evaluate(points[idx])
            mask[idx[values != 0]] = False
        hits = points[mask]
        per_chart[lead] += hits.shape[0]
        found.extend(tuple(int(v) for v in row) for row in hits)
    logger.debug(f"F_{p}: puntos por carta {per_chart}")
    return sorted(found)


def modp_singular_scan(f, p):
    """Puntos singulares de la reducción de f en P^4(F_p), por fuerza bruta"""
    if p in (2, 3):
        raise BadPrime(f"El primo {p} no es admisible para el barrido", p=p)
    pf = find_prime_field(f.field, p)
    reduced = reduce_poly_mod(f, pf)
    gradient = [reduced.partial(i) for i in range(1, f.nvars + 1)]
    found = modp_zero_locus(gradient, p, f.nvars)
    logger.info(f"Barrido módulo {p}: {len(found)} puntos singulares")
    return found


def normalize_mod_p(values, p):
    values = [int(v) % p for v in values]
    lead = next((v for v in values if v), None)
    if lead is None:
        raise BadPrime(f"El punto se anula módulo {p}", p=p)
    inv = pow(lead, -1, p)
    return tuple((v * inv) % p for v in values)


def declared_points_mod_p(points, pf):
    """Reducción de los puntos declarados para compararlos con el barrido"""
    return sorted({normalize_mod_p([reduce_mod(c, pf) for c in pt.coords], pf.p) for pt in points})


def compare_scan(f, points, p):
    """Contrasta el barrido con los puntos declarados en un primo"""
    found = modp_singular_scan(f, p)
    declared = declared_points_mod_p(points, find_prime_field(f.field, p))
    return {
        'prime': p,
        'found': [list(pt) for pt in found],
        'declared': [list(pt) for pt in declared],
        'match': found == declared,
    }
