"""
Jerarquía de errores del toolkit de cúbicas.

Cada error sabe convertirse en el diccionario {'status', 'message', 'error_type'}
que usan los reportes, igual que los resultados de error del resto del sistema.
"""


class ToolkitError(Exception):
    """Error base: todo fallo esperado del toolkit hereda de aquí"""

    error_type = 'toolkit'

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        result = {
            'status': 'error',
            'message': self.message,
            'error_type': self.error_type,
        }
        if self.details:
            result['details'] = {k: str(v) for k, v in self.details.items()}
        return result


# numfield
class UnsupportedOrder(ToolkitError):
    error_type = 'unsupported_order'


class BadPrime(ToolkitError):
    error_type = 'bad_prime'


class FieldMismatch(ToolkitError):
    error_type = 'field_mismatch'


class NotInvertible(ToolkitError):
    error_type = 'not_invertible'


# multipoly
class DimensionMismatch(ToolkitError):
    error_type = 'dimension_mismatch'


class NotHomogeneous(ToolkitError):
    error_type = 'not_homogeneous'


# singularities
class NotSingular(ToolkitError):
    error_type = 'not_singular'


class TruncationInsufficient(ToolkitError):
    error_type = 'truncation_insufficient'


class UnsupportedType(ToolkitError):
    error_type = 'unsupported_type'


# autgroups
class NotInvariant(ToolkitError):
    error_type = 'not_invariant'


class ExceedsCap(ToolkitError):
    error_type = 'exceeds_cap'


class NotStable(ToolkitError):
    error_type = 'not_stable'


# glattice
class TorsionQuotient(ToolkitError):
    error_type = 'torsion_quotient'


class GroupTooLarge(ToolkitError):
    error_type = 'group_too_large'


class NotAHomomorphism(ToolkitError):
    error_type = 'not_a_homomorphism'


class CohomologyMismatch(ToolkitError):
    """Dos caminos de cálculo dan grupos de cohomología distintos"""
    error_type = 'cohomology_mismatch'


# projection
class NotAtOrigin(ToolkitError):
    error_type = 'not_at_origin'


class HasX1Square(ToolkitError):
    error_type = 'has_x1_square'


class FormulaNotApplicable(ToolkitError):
    error_type = 'formula_not_applicable'


class UnresolvedClass(ToolkitError):
    error_type = 'unresolved_class'


# scenarios
class SchemaError(ToolkitError):
    error_type = 'schema_error'

    def __init__(self, message, pointer='', **details):
        super().__init__(f"{message} (en {pointer or '/'})", pointer=pointer or '/', **details)
        self.pointer = pointer or '/'
