#!/usr/bin/env python3
"""
Pruebas del método de proyección: f = x1·f2 + f3, rango de la cuádrica,
verificación de descomposiciones de C_q y defecto
"""

import random

import pytest

from errors import HasX1Square, NotAtOrigin, FormulaNotApplicable, NotInvertible
from numfield import rational_field, cyclotomic
from multipoly import LinearChange, parse_poly, read_poly, substitute, variables
from singularities import ProjPoint, coordinate_point, move_to_origin
from degeneration import ADEType, parse_config
from projection import (
    ComponentClaim, split_at_origin, extract_projection, qq_rank, defect_from_components,
    verify_decomposition, defect_from_claim, cone_class, component_class_action, defect_table,
    VERIFIED, REFUTED, INCONCLUSIVE,
)

Q = rational_field()
F3 = cyclotomic(3)

LINES_3D4 = [['x2', 'x4 + x5'], ['x2', 'x4 + w*x5'], ['x2', 'x4 + w**2*x5'],
             ['x3', 'x4 + x5'], ['x3', 'x4 + w*x5'], ['x3', 'x4 + w**2*x5']]

CONES_2A5 = [['x2*x3 + x4**2', 'x3**2 - x4*x5', 'x3*x4 + x2*x5'],
             ['x2*x3 + x4**2', 'x3**2 + x4*x5', 'x3*x4 - x2*x5']]


def print_separator(title):
    print("\n" + "=" * 60)
    print(title)
    print("=" * 60)


def claim(components, field, expected=None):
    return ComponentClaim([[read_poly(g, field) for g in gens] for gens in components], expected)


def test_split_at_origin():
    f2, f3 = split_at_origin(parse_poly('x1*x2*x3 + x4**3 + x5**3', Q))
    assert f2 == parse_poly('x2*x3', Q)
    assert f3 == parse_poly('x4**3 + x5**3', Q)
    with pytest.raises(HasX1Square):
        split_at_origin(parse_poly('x1**2*x2 + x3**3', Q))


def test_qq_rank():
    assert qq_rank(parse_poly('x2*x3', Q)) == 2
    assert qq_rank(parse_poly('x2*x3 + x4**2', Q)) == 3
    assert qq_rank(parse_poly('x2*x3 + x4*x5', Q)) == 4
    assert qq_rank(parse_poly('(x2 + x3)**2', Q)) == 1
    with pytest.raises(ValueError):
        qq_rank(parse_poly('x2**3', Q))


def test_defect_formula():
    assert defect_from_components(ADEType('D', 4), 6) == 4
    assert defect_from_components(ADEType('A', 5), 2) == 1
    assert defect_from_components(ADEType('A', 2), 1) == 0
    with pytest.raises(FormulaNotApplicable):
        defect_from_components(ADEType('A', 1), 2)


def test_extract_projection_after_move():
    f = parse_poly('x1*x2*x3 + x1*x4**2 + x2*x5**2 + x3**3 + x4**3 + x5**3', Q)
    q = coordinate_point(2, Q)
    pd = extract_projection(f, q, move_to_origin(q))
    assert pd.q_type == ADEType('A', 2)
    assert qq_rank(pd.f2) == 3
    with pytest.raises(NotAtOrigin):
        extract_projection(f, q)
    with pytest.raises(ValueError):
        ComponentClaim([])


def test_3d4_lines_verified():
    print_separator("DEFECTO 3D4")
    f = parse_poly('x1*x2*x3 + x4**3 + x5**3', F3)
    result = defect_from_claim(f, coordinate_point(1, F3), claim(LINES_3D4, F3, 4), [7, 13])
    assert result['q_type'] == 'D4'
    assert result['verification']['verdict'] == VERIFIED
    assert result['defect'] == 4 and result['ok']
    assert 'saturation_assumed' in result['verification']['flags']
    print(f"✅ {result['components']} componentes, defecto {result['defect']}")


def test_decomposition_refutations():
    f = parse_poly('x1*x2*x3 + x4**3 + x5**3', F3)
    pd = extract_projection(f, coordinate_point(1, F3))
    # una componente que no está en C_q
    wrong = claim(LINES_3D4[:5] + [['x2', 'x4']], F3)
    assert verify_decomposition(pd, wrong, [7]).verdict == REFUTED
    # falta una recta: el barrido encuentra puntos fuera de la unión
    partial = verify_decomposition(pd, claim(LINES_3D4[:5], F3), [7])
    assert partial.verdict == REFUTED
    assert partial.primes[0]['escaped']
    assert 'single_prime' in partial.flags
    assert verify_decomposition(pd, claim(LINES_3D4, F3), []).verdict == INCONCLUSIVE


def test_2d4_2a1_defect():
    f = parse_poly('x1*x2*x3 + x1*x2*x4 + x3*x4*x5 + x5**3', Q)
    components = [['x2', 'x5'], ['x2', 'x3*x4 + x5**2'], ['x3 + x4', 'x5'],
                  ['x3 + x4', 'x5 - x3'], ['x3 + x4', 'x5 + x3']]
    result = defect_from_claim(f, coordinate_point(1, Q), claim(components, Q, 3), [7, 11])
    assert result['q_type'] == 'D4'
    assert result['defect'] == 3 and result['ok']


def test_cone_class_action_2a5():
    print_separator("ACCIÓN SOBRE CONOS 2A5")
    cones = [[read_poly(g, Q) for g in gens] for gens in CONES_2A5]
    quadrics = [read_poly('x3**2 - x4*x5', Q), read_poly('x3**2 + x4*x5', Q)]
    identity = LinearChange.identity(Q)
    assert cone_class(identity, cones[0], cones, quadrics) == ('cone', 0)
    s1245 = LinearChange.from_images(['x2', 'x1', 'x3', 'x5', 'x4'], Q)
    rows, explanation = component_class_action(s1245, cones, quadrics, ['H', 0], [[0, 1], [2, -1]], [1, 0])
    assert rows == [[1, 0], [2, -1]]
    mixed = LinearChange.from_images(['x2', 'x1', 'x3', 'x5', '-x4'], Q)
    rows, _ = component_class_action(mixed, cones, quadrics, ['H', 0], [[0, 1], [2, -1]], [1, 0])
    assert rows == [[1, 0], [0, 1]]
    print(f"✅ {explanation}")


def test_defect_table():
    table = defect_table()
    assert table[parse_config('3D4')] == {4}
    assert table[parse_config('2A3')] == {0, 1}
    assert parse_config('2A1') not in table


def random_change_of_x2_to_x5(field, rng):
    while True:
        rows = [[1, 0, 0, 0, 0]] + [[0] + [rng.randint(-2, 2) for _ in range(4)] for _ in range(4)]
        try:
            return LinearChange(field, rows)
        except NotInvertible:
            continue


def test_qq_rank_invariant_under_coordinate_changes():
    print_separator("RANGO DE LA CUÁDRICA BAJO CAMBIOS DE x2..x5")
    rng = random.Random(99)
    quadrics = ['x2*x3', 'x2*x3 + x4**2', 'x2*x3 + x4*x5', '(x2 + x3)**2', 'x2**2 - x3*x4 + 3*x5**2']
    for text in quadrics:
        f2 = parse_poly(text, Q)
        rank = qq_rank(f2)
        for _ in range(20):
            moved = substitute(f2, random_change_of_x2_to_x5(Q, rng))
            assert moved.is_homogeneous(2)
            assert qq_rank(moved) == rank
        print(f"✅ {text}: rango {rank}")


def test_extract_projection_reassembles_moved_cubic():
    """x1·f2 + f3 reconstruye la cúbica trasladada"""
    print_separator("RECONSTRUCCIÓN x1·f2 + f3")
    rng = random.Random(7)
    cases = [
        ('x1*x2*x3 + x4**3 + x5**3', F3, [coordinate_point(i, F3) for i in (1, 2, 3)]),
        ('x1*x2*x3 + x1*x4**2 + x2*x5**2 + x3**3', Q, [coordinate_point(i, Q) for i in (1, 2)]),
        ('(x1**2 - x3**2)*x4 + (x2**2 - x3**2)*x5 + x3*x4*x5', Q,
         [ProjPoint.make([1, -1, 1, 0, 0], Q), coordinate_point(4, Q)]),
    ]
    for text, field, points in cases:
        f = parse_poly(text, field)
        x1 = variables(field)[0]
        for q in points:
            for move in (move_to_origin(q), move_to_origin(q) @ random_change_of_x2_to_x5(field, rng)):
                pd = extract_projection(f, q, move)
                assert pd.moved_cubic == substitute(f, move.inverse())
                assert x1 * pd.f2 + pd.f3 == pd.moved_cubic
                assert pd.f2.is_homogeneous(2) or pd.f2.is_zero()
            print(f"✅ {q}: {pd.q_type}")


if __name__ == '__main__':
    for name, func in list(globals().items()):
        if name.startswith('test_') and callable(func):
            func()
    print("\n🎉 PRUEBAS DE projection COMPLETADAS")
