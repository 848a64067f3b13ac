"""
Polinomios multivariados dispersos sobre el cuerpo de la sesión.

Un MultiPoly es un diccionario exponente -> coeficiente (AlgebraicNumber)
sin coeficientes nulos. El orden de términos es graduado lexicográfico y es
el único que se usa al serializar.
"""

import logging
import itertools
from functools import lru_cache

import numpy as np
import sympy

from errors import DimensionMismatch, NotHomogeneous, NotInvertible
from numfield import (
    AlgebraicNumber, EchelonBasis, parse_number, reduce_mod, matrix_rank, matrix_inverse,
)

logger = logging.getLogger(__name__)

DEFAULT_NVARS = 5


def term_order_key(exp):
    """Clave grlex: grado total y luego lexicográfico"""
    return (sum(exp), exp)


@lru_cache(maxsize=None)
def monomials(nvars, degree):
    """Todos los exponentes de grado total 'degree', en orden grlex descendente"""
    result = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        exp = [0] * nvars
        for i in combo:
            exp[i] += 1
        result.append(tuple(exp))
    return tuple(sorted(result, key=term_order_key, reverse=True))


class MultiPoly:
    """Polinomio disperso en nvars variables x1..xn"""

    __slots__ = ('field', 'nvars', 'terms')

    def __init__(self, field, terms=None, nvars=DEFAULT_NVARS):
        self.field = field
        self.nvars = nvars
        clean = {}
        for exp, coeff in (terms or {}).items():
            exp = tuple(exp)
            if len(exp) != nvars:
                raise DimensionMismatch(
                    f"Exponente {exp} con longitud distinta de {nvars}", nvars=nvars)
            coeff = field(coeff)
            if coeff:
                clean[exp] = clean[exp] + coeff if exp in clean else coeff
                if not clean[exp]:
                    del clean[exp]
        self.terms = clean

    # -- constructores ----------------------------------------------------
    @classmethod
    def zero(cls, field, nvars=DEFAULT_NVARS):
        return cls(field, {}, nvars)

    @classmethod
    def constant(cls, field, value, nvars=DEFAULT_NVARS):
        return cls(field, {(0,) * nvars: value}, nvars)

    @classmethod
    def variable(cls, field, i, nvars=DEFAULT_NVARS):
        """La variable x_i (i empieza en 1)"""
        if not 1 <= i <= nvars:
            raise DimensionMismatch(f"Variable x{i} fuera de rango", nvars=nvars)
        exp = [0] * nvars
        exp[i - 1] = 1
        return cls(field, {tuple(exp): field.one}, nvars)

    def _new(self, terms):
        poly = MultiPoly.__new__(MultiPoly)
        poly.field = self.field
        poly.nvars = self.nvars
        poly.terms = terms
        return poly

    def _check(self, other):
        if other.nvars != self.nvars:
            raise DimensionMismatch(
                f"Polinomios en {self.nvars} y {other.nvars} variables", nvars=self.nvars)

    def _lift(self, other):
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        if isinstance(other, (int, AlgebraicNumber)) or hasattr(other, 'denominator'):
            return MultiPoly.constant(self.field, other, self.nvars)
        return NotImplemented

    # -- aritmética -------------------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for exp, c in other.terms.items():
            value = terms[exp] + c if exp in terms else c
            if value:
                terms[exp] = value
            else:
                terms.pop(exp, None)
        return self._new(terms)

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, scalar):
        scalar = self.field(scalar)
        if not scalar:
            return self._new({})
        return self._new({e: c * scalar for e, c in self.terms.items()})

    def mul(self, other, max_degree=None):
        """Producto, descartando términos de grado > max_degree si se pide"""
        self._check(other)
        terms = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for e2, c2 in other.terms.items():
                if max_degree is not None and d1 + sum(e2) > max_degree:
                    continue
                exp = tuple(a + b for a, b in zip(e1, e2))
                value = terms[exp] + c1 * c2 if exp in terms else c1 * c2
                if value:
                    terms[exp] = value
                else:
                    del terms[exp]
        return self._new(terms)

    def __mul__(self, other):
        if isinstance(other, MultiPoly):
            return self.mul(other)
        if isinstance(other, (int, AlgebraicNumber)) or hasattr(other, 'denominator'):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = MultiPoly.constant(self.field, 1, self.nvars)
        for _ in range(k):
            result = result * self
        return result

    # -- consultas --------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, int) and other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def coefficient(self, exp):
        return self.terms.get(tuple(exp), self.field.zero)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: term_order_key(t[0]), reverse=True)

    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def min_degree(self):
        return min((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self, degree=None):
        degrees = {sum(e) for e in self.terms}
        if not degrees:
            return True
        if len(degrees) != 1:
            return False
        return degree is None or degrees == {degree}

    def homogeneous_part(self, degree):
        return self._new({e: c for e, c in self.terms.items() if sum(e) == degree})

    def truncate(self, max_degree):
        return self._new({e: c for e, c in self.terms.items() if sum(e) <= max_degree})

    def variables_used(self):
        return sorted({i + 1 for e in self.terms for i, a in enumerate(e) if a})

    def partial(self, i):
        """Derivada parcial formal respecto de x_i (i empieza en 1)"""
        if not 1 <= i <= self.nvars:
            raise DimensionMismatch(f"Variable x{i} fuera de rango", nvars=self.nvars)
        k = i - 1
        terms = {}
        for exp, c in self.terms.items():
            if exp[k]:
                new_exp = exp[:k] + (exp[k] - 1,) + exp[k + 1:]
                terms[new_exp] = c * exp[k]
        return self._new(terms)

    def gradient(self):
        return [self.partial(i) for i in range(1, self.nvars + 1)]

    def evaluate(self, values):
        """Valor en un punto dado como secuencia de escalares"""
        if len(values) != self.nvars:
            raise DimensionMismatch(f"Se esperaban {self.nvars} coordenadas", nvars=self.nvars)
        values = [self.field(v) for v in values]
        total = self.field.zero
        for exp, c in self.terms.items():
            term = c
            for v, a in zip(values, exp):
                if a:
                    term = term * v ** a
            total = total + term
        return total

    # -- serialización ----------------------------------------------------
    def to_json(self):
        return [{'exp': list(e), 'coeff': c.to_json()} for e, c in self.sorted_terms()]

    def __str__(self):
        if not self.terms:
            return '0'
        parts = []
        for exp, c in self.sorted_terms():
            mono = '*'.join(
                f"x{i + 1}" if a == 1 else f"x{i + 1}**{a}" for i, a in enumerate(exp) if a)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"({c})*{mono}")
        return ' + '.join(parts)

    def __repr__(self):
        return f"MultiPoly({self})"


def variables(field, nvars=DEFAULT_NVARS):
    """Lista [x1, ..., xn] como MultiPoly"""
    return [MultiPoly.variable(field, i, nvars) for i in range(1, nvars + 1)]


def from_json(data, field, nvars=DEFAULT_NVARS):
    terms = {}
    for item in data:
        exp = tuple(int(a) for a in item['exp'])
        if len(exp) != nvars:
            raise DimensionMismatch(f"Exponente {exp} no tiene {nvars} entradas", nvars=nvars)
        coeff = parse_number(item['coeff'], field)
        terms[exp] = terms[exp] + coeff if exp in terms else coeff
    return MultiPoly(field, terms, nvars)


_SYMBOLS = {}


def _symbols(nvars):
    if nvars not in _SYMBOLS:
        _SYMBOLS[nvars] = sympy.symbols(f"x1:{nvars + 1}")
    return _SYMBOLS[nvars]


def parse_poly(text, field, nvars=DEFAULT_NVARS):
    """
    Lee un polinomio escrito a mano, por ejemplo 'x1*x2*x3 + w*x5**3'.
    Las variables son x1..xn y 'w' denota el generador θ del cuerpo.
    """
    xs = _symbols(nvars)
    local = {str(x): x for x in xs}
    local['w'] = sympy.Symbol('w')
    expr = sympy.expand(sympy.sympify(text, locals=local))
    unknown = {str(s) for s in expr.free_symbols} - set(local)
    if unknown:
        names = ', '.join(sorted(unknown))
        if any(name.startswith('x') for name in unknown):
            raise DimensionMismatch(f"Variables fuera de x1..x{nvars}: {names}", nvars=nvars)
        raise ValueError(f"Símbolos desconocidos en el polinomio: {names}")
    if expr == 0:
        return MultiPoly.zero(field, nvars)
    poly = sympy.Poly(expr, *xs)
    terms = {}
    for exp, coeff in poly.as_dict().items():
        terms[tuple(exp)] = parse_number(sympy.sympify(coeff), field)
    return MultiPoly(field, terms, nvars)


def read_poly(data, field, nvars=DEFAULT_NVARS):
    """Acepta tanto texto legible como la forma JSON canónica"""
    if isinstance(data, str):
        return parse_poly(data, field, nvars)
    return from_json(data, field, nvars)


# ============================================================================
# CAMBIOS LINEALES DE VARIABLES
# ============================================================================

class LinearChange:
    """
    Matriz invertible M que actúa en vectores fila: x ↦ x·M.
    La columna i contiene los coeficientes de la imagen de x_i.
    """

    __slots__ = ('field', 'matrix')

    def __init__(self, field, matrix, check=True):
        self.field = field
        self.matrix = tuple(tuple(field(v) for v in row) for row in matrix)
        n = len(self.matrix)
        if any(len(row) != n for row in self.matrix):
            raise DimensionMismatch("La matriz del cambio no es cuadrada", nvars=n)
        if check and matrix_rank(self.matrix) != n:
            raise NotInvertible("El cambio de variables tiene determinante nulo")

    @property
    def n(self):
        return len(self.matrix)

    @classmethod
    def identity(cls, field, n=DEFAULT_NVARS):
        return cls(field, [[1 if i == j else 0 for j in range(n)] for i in range(n)], check=False)

    @classmethod
    def diagonal(cls, field, entries):
        n = len(entries)
        return cls(field, [[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_images(cls, images, field):
        """
        Construye M a partir de las imágenes escritas como en
        σ: x ↦ (x3, x1, x2, x4, x5). M[j][i] es el coeficiente de x_j en la
        salida i.
        """
        n = len(images)
        matrix = [[field.zero] * n for _ in range(n)]
        for i, image in enumerate(images):
            form = read_poly(image, field, n) if not isinstance(image, MultiPoly) else image
            if not form.is_homogeneous(1):
                raise NotHomogeneous(f"La imagen {image!r} no es una forma lineal")
            for exp, c in form.terms.items():
                matrix[exp.index(1)][i] = c
        return cls(field, matrix)

    @classmethod
    def from_json(cls, rows, field):
        return cls(field, [[parse_number(v, field) for v in row] for row in rows])

    def to_json(self):
        return [[v.to_json() for v in row] for row in self.matrix]

    def images(self):
        """Formas lineales imagen de cada variable"""
        n = self.n
        result = []
        for i in range(n):
            terms = {}
            for j in range(n):
                if self.matrix[j][i]:
                    exp = tuple(1 if k == j else 0 for k in range(n))
                    terms[exp] = self.matrix[j][i]
            result.append(MultiPoly(self.field, terms, n))
        return result

    def __matmul__(self, other):
        n = self.n
        if other.n != n:
            raise DimensionMismatch("Producto de cambios de distinta dimensión", nvars=n)
        zero = self.field.zero
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                total = zero
                for k in range(n):
                    a = self.matrix[i][k]
                    if a:
                        b = other.matrix[k][j]
                        if b:
                            total = total + a * b
                row.append(total)
            rows.append(row)
        return LinearChange(self.field, rows, check=False)

    def inverse(self):
        return LinearChange(self.field, matrix_inverse(self.matrix, self.field), check=False)

    def apply_point(self, coords):
        """Vector fila coords·M"""
        coords = [self.field(c) for c in coords]
        if len(coords) != self.n:
            raise DimensionMismatch("El punto no tiene la dimensión del cambio", nvars=self.n)
        result = []
        for i in range(self.n):
            total = self.field.zero
            for j, c in enumerate(coords):
                if c and self.matrix[j][i]:
                    total = total + c * self.matrix[j][i]
            result.append(total)
        return result

    def __eq__(self, other):
        return isinstance(other, LinearChange) and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        return f"LinearChange({[str(p) for p in self.images()]})"


def substitute_forms(f, forms, max_degree=None):
    """
    Reemplaza x_i por forms[i-1] (MultiPoly, todos con el mismo número de
    variables). No exige que las formas sean lineales ni homogéneas.
    """
    if len(forms) != f.nvars:
        raise DimensionMismatch(
            f"Se esperaban {f.nvars} formas, llegaron {len(forms)}", nvars=f.nvars)
    target_nvars = forms[0].nvars if forms else f.nvars
    result = MultiPoly.zero(f.field, target_nvars)
    power_cache = {}

    def power(i, k):
        key = (i, k)
        if key not in power_cache:
            if k == 0:
                power_cache[key] = MultiPoly.constant(f.field, 1, target_nvars)
            else:
                power_cache[key] = power(i, k - 1).mul(forms[i], max_degree)
        return power_cache[key]

    for exp, coeff in f.terms.items():
        term = MultiPoly.constant(f.field, coeff, target_nvars)
        for i, a in enumerate(exp):
            if a:
                term = term.mul(power(i, a), max_degree)
        result = result + term
    return result


def substitute(f, T):
    """
    f evaluado en x·T. Con esta convención
    substitute(substitute(f, S), T) == substitute(f, T @ S).
    """
    if f.nvars != T.n:
        raise DimensionMismatch(
            f"Polinomio en {f.nvars} variables y cambio de dimensión {T.n}", nvars=f.nvars)
    return substitute_forms(f, T.images())


def substitute_ideal(gens, T):
    """Generadores del ideal trasladado: {g(x·T)}"""
    return [substitute(g, T) for g in gens]


# ============================================================================
# PERTENENCIA GRADUADA A IDEALES
# ============================================================================

def _degree_piece(gens, d):
    """Base escalonada de la parte de grado d del ideal generado por gens"""
    basis = EchelonBasis()
    for h in gens:
        if h.is_zero():
            continue
        if not h.is_homogeneous():
            raise NotHomogeneous(f"Generador no homogéneo: {h}")
        k = h.degree()
        if k > d:
            continue
        for exp in monomials(h.nvars, d - k):
            shifted = {tuple(a + b for a, b in zip(exp, e)): c for e, c in h.terms.items()}
            basis.add(shifted)
    return basis


def graded_membership(g, gens, d):
    """
    ¿Está g en la parte de grado d del ideal (gens)? Se decide resolviendo el
    sistema lineal cuyas columnas son los múltiplos monomiales de los
    generadores.
    """
    if not g.is_homogeneous(d):
        raise NotHomogeneous(f"El polinomio no es homogéneo de grado {d}: {g}")
    if g.is_zero():
        return True
    basis = _degree_piece(gens, d)
    result = basis.contains(g.terms)
    logger.debug(f"Pertenencia en grado {d}: rango {basis.rank}, resultado {result}")
    return result


def ideal_degree_rank(gens, d):
    """Dimensión de la parte de grado d del ideal"""
    return _degree_piece(gens, d).rank


def same_ideal_in_degrees(gens_a, gens_b, degrees):
    """Igualdad de ideales homogéneos comparando las partes de los grados dados"""
    for d in degrees:
        if not all(graded_membership(g, gens_b, d) for g in gens_a if g.degree() == d):
            return False
        if not all(graded_membership(g, gens_a, d) for g in gens_b if g.degree() == d):
            return False
        if ideal_degree_rank(gens_a, d) != ideal_degree_rank(gens_b, d):
            return False
    return True


# ============================================================================
# REDUCCIÓN MÓDULO p
# ============================================================================

class ModPPoly:
    """Polinomio con coeficientes en F_p, guardado en arreglos de numpy"""

    def __init__(self, p, nvars, terms):
        self.p = p
        self.nvars = nvars
        self.terms = {tuple(e): int(c) % p for e, c in terms.items() if int(c) % p}
        ordered = sorted(self.terms, key=term_order_key, reverse=True)
        self.exps = np.array(ordered, dtype=np.int64).reshape(len(ordered), nvars)
        self.coeffs = np.array([self.terms[e] for e in ordered], dtype=np.int64)

    def __eq__(self, other):
        return (isinstance(other, ModPPoly) and self.p == other.p
                and self.terms == other.terms)

    def __repr__(self):
        return f"ModPPoly(p={self.p}, {self.terms})"

    def partial(self, i):
        k = i - 1
        terms = {}
        for exp, c in self.terms.items():
            if exp[k]:
                terms[exp[:k] + (exp[k] - 1,) + exp[k + 1:]] = c * exp[k]
        return ModPPoly(self.p, self.nvars, terms)

    def evaluate(self, points):
        """Evalúa en un arreglo (N, nvars) de enteros mod p; devuelve (N,)"""
        points = np.asarray(points, dtype=np.int64) % self.p
        total = np.zeros(points.shape[0], dtype=np.int64)
        for exp, c in zip(self.exps, self.coeffs):
            term = np.full(points.shape[0], c, dtype=np.int64)
            for k, a in enumerate(exp):
                for _ in range(int(a)):
                    term = (term * points[:, k]) % self.p
            total = (total + term) % self.p
        return total


def reduce_poly_mod(f, pf):
    """Reducción coeficiente a coeficiente; BadPrime se propaga"""
    return ModPPoly(pf.p, f.nvars, {e: reduce_mod(c, pf) for e, c in f.terms.items()})
