"""
Aritmética exacta sobre Q y extensiones simples Q(θ).

Un elemento se guarda como vector de coeficientes racionales en la base
potencia 1, θ, ..., θ^(d-1). No hay punto flotante en ninguna parte.
"""

import logging
from fractions import Fraction
from functools import lru_cache
from dataclasses import dataclass, field as dc_field

import sympy

from errors import UnsupportedOrder, BadPrime, FieldMismatch, NotInvertible

logger = logging.getLogger(__name__)

Rational = Fraction

SUPPORTED_CYCLOTOMIC = (1, 2, 3, 4, 6, 8, 12, 24)

# Símbolos usados para hablar con sympy
_X = sympy.Symbol('x')
THETA = sympy.Symbol('w')


def to_fraction(value):
    """Convierte int, Fraction, texto 'a/b' o racional de sympy en Fraction"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    raise TypeError(f"No se puede convertir {value!r} a racional")


def _sympy_coeffs(poly, degree):
    """Coeficientes de un Poly de sympy, de grado bajo a alto, rellenados"""
    coeffs = [to_fraction(c) for c in reversed(poly.all_coeffs())]
    coeffs += [Fraction(0)] * (degree - len(coeffs))
    return tuple(coeffs[:degree]) if degree else tuple(coeffs)


@dataclass(frozen=True, eq=False)
class NumberField:
    """Cuerpo Q(θ) dado por un polinomio mínimo mónico"""

    min_poly: tuple
    label: str = ''
    descriptor: tuple = dc_field(default=('minpoly',))

    def __post_init__(self):
        if len(self.min_poly) < 2:
            raise ValueError("El polinomio mínimo debe tener grado >= 1")
        if self.min_poly[-1] != 1:
            raise ValueError("El polinomio mínimo debe ser mónico")

    @property
    def degree(self):
        return len(self.min_poly) - 1

    @property
    def is_rational(self):
        return self.degree == 1

    def _key(self):
        # Todos los cuerpos de grado 1 son Q
        return ('Q',) if self.degree == 1 else self.min_poly

    def __eq__(self, other):
        return isinstance(other, NumberField) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"NumberField({self.label or self.min_poly})"

    @property
    def power_table(self):
        """θ^k reducido, para k = 0 .. 2d-2"""
        return _power_table(self.min_poly)

    def element(self, coeffs):
        coeffs = tuple(to_fraction(c) for c in coeffs)
        if len(coeffs) != self.degree:
            raise ValueError(f"Se esperaban {self.degree} coeficientes, llegaron {len(coeffs)}")
        return AlgebraicNumber(self, coeffs)

    def __call__(self, value):
        """Coerción de int, Fraction, texto o AlgebraicNumber al cuerpo"""
        if isinstance(value, AlgebraicNumber):
            if value.field != self:
                raise FieldMismatch(f"Elemento de {value.field.label} usado en {self.label}")
            return value
        if isinstance(value, (list, tuple)):
            return self.element(value)
        if isinstance(value, str):
            return parse_number(value, self)
        return AlgebraicNumber(self, (to_fraction(value),) + (Fraction(0),) * (self.degree - 1))

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    @property
    def gen(self):
        """El generador θ"""
        if self.degree == 1:
            return self(-self.min_poly[0])
        return self.element([0, 1] + [0] * (self.degree - 2))

    def to_json(self):
        kind = self.descriptor[0]
        if kind == 'cyclotomic':
            return {'kind': 'cyclotomic', 'n': self.descriptor[1]}
        if kind == 'quadratic':
            return {'kind': 'quadratic', 'd': str(self.descriptor[1])}
        if kind == 'rational':
            return {'kind': 'rational'}
        return {'kind': 'minpoly', 'coeffs': [str(c) for c in self.min_poly]}


@lru_cache(maxsize=None)
def _power_table(min_poly):
    d = len(min_poly) - 1
    table = []
    for k in range(d):
        table.append(tuple(Fraction(1) if i == k else Fraction(0) for i in range(d)))
    # θ^d = -(c_0 + c_1 θ + ... + c_{d-1} θ^{d-1})
    current = tuple(-c for c in min_poly[:d])
    for _ in range(d, 2 * d - 1):
        table.append(current)
        # multiplicar por θ y reducir
        top = current[-1]
        shifted = (Fraction(0),) + current[:-1]
        current = tuple(shifted[i] - top * min_poly[i] for i in range(d))
    return tuple(table)


@lru_cache(maxsize=4096)
def _inverse_coeffs(min_poly, coeffs):
    """Inverso por Euclides extendido en Q[x] (sympy.gcdex)"""
    d = len(min_poly) - 1
    a = sympy.Poly(list(reversed(coeffs)), _X, domain='QQ')
    m = sympy.Poly(list(reversed(min_poly)), _X, domain='QQ')
    s, _t, h = a.gcdex(m)
    if h.degree() != 0:
        raise NotInvertible("El polinomio mínimo no es irreducible: gcd no trivial", gcd=h.as_expr())
    inv = s * sympy.Poly(1 / h.as_expr(), _X, domain='QQ')
    return _sympy_coeffs(inv, d)


class AlgebraicNumber:
    """Elemento de un NumberField (inmutable)"""

    __slots__ = ('field', 'coeffs')

    def __init__(self, field, coeffs):
        self.field = field
        self.coeffs = coeffs

    # -- coerción ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, AlgebraicNumber):
            if other.field is not self.field and other.field != self.field:
                raise FieldMismatch(
                    f"Aritmética mixta entre {self.field.label} y {other.field.label}")
            return other
        if isinstance(other, (int, Fraction)):
            return AlgebraicNumber(self.field, (Fraction(other),) + (Fraction(0),) * (len(self.coeffs) - 1))
        return NotImplemented

    # -- aritmética -------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return AlgebraicNumber(self.field, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicNumber(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return AlgebraicNumber(self.field, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return AlgebraicNumber(self.field, tuple(a * other for a in self.coeffs))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d = len(self.coeffs)
        if d == 1:
            return AlgebraicNumber(self.field, (self.coeffs[0] * other.coeffs[0],))
        product = [Fraction(0)] * (2 * d - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        product[i + j] += a * b
        table = self.field.power_table
        result = list(product[:d])
        for k in range(d, 2 * d - 1):
            c = product[k]
            if c:
                for i, t in enumerate(table[k]):
                    if t:
                        result[i] += c * t
        return AlgebraicNumber(self.field, tuple(result))

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("Inverso de cero en el cuerpo")
        if len(self.coeffs) == 1:
            return AlgebraicNumber(self.field, (1 / self.coeffs[0],))
        return AlgebraicNumber(self.field, _inverse_coeffs(self.field.min_poly, self.coeffs))

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, exponent):
        if not isinstance(exponent, int):
            return NotImplemented
        base = self if exponent >= 0 else self.inverse()
        exponent = abs(exponent)
        result = self.field.one
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    # -- comparación ------------------------------------------------------
    def is_zero(self):
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def is_rational(self):
        return not any(self.coeffs[1:])

    def to_fraction(self):
        if not self.is_rational():
            raise ValueError(f"{self} no es racional")
        return self.coeffs[0]

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        if isinstance(other, AlgebraicNumber):
            return self.field == other.field and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash(self.coeffs)

    def multiplicative_order(self, bound=48):
        """Orden multiplicativo si es raíz de la unidad de orden <= bound, si no None"""
        if self.is_zero():
            return None
        power = self
        for k in range(1, bound + 1):
            if power == 1:
                return k
            power = power * self
        return None

    # -- presentación -----------------------------------------------------
    def to_json(self):
        return [f"{c.numerator}/{c.denominator}" for c in self.coeffs]

    def __str__(self):
        parts = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            if k == 0:
                parts.append(str(c))
            elif k == 1:
                parts.append(f"{c}*w" if c != 1 else "w")
            else:
                parts.append(f"{c}*w**{k}" if c != 1 else f"w**{k}")
        return ' + '.join(parts) if parts else '0'

    def __repr__(self):
        return f"AlgebraicNumber({self})"


# ============================================================================
# CONSTRUCTORES DE CUERPOS
# ============================================================================

def rational_field():
    """Q, representado con polinomio mínimo x - 1"""
    return NumberField((Fraction(-1), Fraction(1)), 'rational', ('rational',))


def cyclotomic(n):
    """Q(ζ_n) con el n-ésimo polinomio ciclotómico; n <= 2 devuelve Q"""
    if n not in SUPPORTED_CYCLOTOMIC:
        raise UnsupportedOrder(f"Orden ciclotómico no soportado: {n}", n=n)
    poly = sympy.cyclotomic_poly(n, _X, polys=True)
    coeffs = tuple(to_fraction(c) for c in reversed(poly.all_coeffs()))
    return NumberField(coeffs, f'cyclotomic-{n}', ('cyclotomic', n))


def quadratic(d):
    """Q(√d) con polinomio mínimo x² - d (no se verifica que d no sea cuadrado)"""
    d = to_fraction(d)
    return NumberField((-d, Fraction(0), Fraction(1)), f'sqrt-{d}', ('quadratic', d))


def field_from_minpoly(coeffs, label=''):
    coeffs = tuple(to_fraction(c) for c in coeffs)
    return NumberField(coeffs, label or f'minpoly-{len(coeffs) - 1}', ('minpoly',))


def field_from_json(spec):
    """Lee el descriptor JSON {"kind": ...} de un cuerpo"""
    kind = spec.get('kind')
    if kind == 'cyclotomic':
        return cyclotomic(int(spec['n']))
    if kind == 'quadratic':
        return quadratic(spec['d'])
    if kind == 'rational':
        return rational_field()
    if kind == 'minpoly':
        return field_from_minpoly(spec['coeffs'])
    raise ValueError(f"Tipo de cuerpo desconocido: {kind!r}")


def check_irreducible(field):
    """Factoriza el polinomio mínimo con sympy (solo para --field-check)"""
    poly = sympy.Poly(list(reversed(field.min_poly)), _X, domain='QQ')
    return poly.is_irreducible


def parse_number(text, field):
    """Lee un escalar escrito como expresión en w = θ (por ejemplo '-w**2 + 1/2')"""
    if isinstance(text, (list, tuple)):
        return field.element(text)
    if isinstance(text, (int, Fraction)):
        return field(text)
    expr = sympy.sympify(str(text), locals={'w': THETA})
    numerator, denominator = sympy.fraction(sympy.together(expr))
    return _eval_theta_poly(numerator, field) / _eval_theta_poly(denominator, field)


def _eval_theta_poly(expr, field):
    poly = sympy.Poly(expr, THETA, domain='QQ')
    gen = field.gen
    result = field.zero
    # Horner en θ
    for c in poly.all_coeffs():
        result = result * gen + to_fraction(c)
    return result


# ============================================================================
# REDUCCIÓN MÓDULO p
# ============================================================================

@dataclass(frozen=True)
class PrimeField:
    """F_p junto con la imagen de θ (None cuando el cuerpo es Q)"""

    p: int
    theta_image: int = None
    field: NumberField = None


def _reduce_fraction(c, p):
    if c.denominator % p == 0:
        raise BadPrime(f"El denominador de {c} se anula módulo {p}", p=p)
    return (c.numerator * pow(c.denominator, -1, p)) % p


def find_prime_field(field, p):
    """Elige la menor raíz del polinomio mínimo módulo p"""
    if not sympy.isprime(p):
        raise BadPrime(f"{p} no es primo", p=p)
    if field.is_rational:
        return PrimeField(p, None, field)
    poly = [_reduce_fraction(c, p) for c in field.min_poly]
    for r in range(p):
        value = 0
        for c in reversed(poly):
            value = (value * r + c) % p
        if value == 0:
            logger.debug(f"θ ↦ {r} en F_{p} para {field.label}")
            return PrimeField(p, r, field)
    raise BadPrime(f"El polinomio mínimo de {field.label} no tiene raíz módulo {p}", p=p)


def reduce_mod(a, pf):
    """Homomorfismo Z[θ]_(p) -> F_p"""
    if isinstance(a, (int, Fraction)):
        return _reduce_fraction(Fraction(a), pf.p)
    if len(a.coeffs) > 1 and pf.theta_image is None:
        raise BadPrime("Falta la imagen de θ para reducir", p=pf.p)
    value = 0
    power = 1
    for c in a.coeffs:
        if c:
            value = (value + _reduce_fraction(c, pf.p) * power) % pf.p
        if pf.theta_image is not None:
            power = (power * pf.theta_image) % pf.p
    return value


# ============================================================================
# ÁLGEBRA LINEAL EXACTA
# ============================================================================

class EchelonBasis:
    """
    Base escalonada incremental de vectores dispersos (dict clave -> escalar).
    Los pivotes quedan normalizados a 1.
    """

    def __init__(self):
        self.rows = []          # lista de (pivote, vector)

    @property
    def rank(self):
        return len(self.rows)

    def reduce(self, vector):
        remainder = {k: v for k, v in vector.items() if v}
        for pivot, row in self.rows:
            factor = remainder.get(pivot)
            if not factor:
                continue
            for key, value in row.items():
                updated = remainder.get(key, 0) - factor * value
                if updated:
                    remainder[key] = updated
                else:
                    remainder.pop(key, None)
        return remainder

    def add(self, vector):
        """Agrega el vector; devuelve True si era independiente"""
        remainder = self.reduce(vector)
        if not remainder:
            return False
        pivot = min(remainder)
        scale = remainder[pivot].inverse() if hasattr(remainder[pivot], 'inverse') else Fraction(1) / remainder[pivot]
        self.rows.append((pivot, {k: v * scale for k, v in remainder.items()}))
        return True

    def contains(self, vector):
        return not self.reduce(vector)


def matrix_rank(rows):
    """Rango exacto de una matriz dada como lista de filas"""
    basis = EchelonBasis()
    for row in rows:
        basis.add({j: v for j, v in enumerate(row) if v})
    return basis.rank


def matrix_inverse(rows, field):
    """Inversa por Gauss-Jordan; NotInvertible si es singular"""
    n = len(rows)
    work = [[field(v) for v in row] + [field.one if i == j else field.zero for j in range(n)]
            for i, row in enumerate(rows)]
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if work[r][col]), None)
        if pivot_row is None:
            raise NotInvertible("Matriz singular")
        work[col], work[pivot_row] = work[pivot_row], work[col]
        inv = work[col][col].inverse()
        work[col] = [v * inv for v in work[col]]
        for r in range(n):
            if r != col and work[r][col]:
                factor = work[r][col]
                work[r] = [a - factor * b for a, b in zip(work[r], work[col])]
    return [row[n:] for row in work]
