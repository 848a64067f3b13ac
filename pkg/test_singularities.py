#!/usr/bin/env python3
"""
Pruebas de verificación y clasificación de puntos singulares, y del
barrido exhaustivo módulo p
"""

import random

import pytest

from errors import NotSingular, TruncationInsufficient, UnsupportedType, BadPrime, NotInvertible
from numfield import rational_field, cyclotomic
from multipoly import LinearChange, parse_poly, variables, substitute
from degeneration import ADEType, parse_config
from singularities import (
    ProjPoint, coordinate_point, transform_point, is_singular_at, classify_ade,
    singular_configuration, move_to_origin, projective_points, modp_singular_scan,
    compare_scan, binary_cubic_squarefree,
)

Q = rational_field()
F3 = cyclotomic(3)

CUBIC_3D4 = 'x1*x2*x3 + x4**3 + x5**3'
CUBIC_2A5 = 'x1*x2*x3 + x1*x4**2 + x2*x5**2 + x3**3'
CUBIC_2A2 = 'x1*x2*x3 + x1*x4**2 + x2*x5**2 + x3**3 + x4**3 + x5**3'


def print_separator(title):
    print("\n" + "=" * 60)
    print(title)
    print("=" * 60)


def test_points_are_normalized():
    p = ProjPoint.make([0, 2, 4, 0, -2], Q)
    assert p.coords == tuple(Q(v) for v in (0, 1, 2, 0, -1))
    assert p.chart == 2
    with pytest.raises(ValueError):
        ProjPoint.make([0, 0, 0, 0, 0], Q)


def test_coordinate_points_singular():
    f = parse_poly(CUBIC_3D4, F3)
    for i in (1, 2, 3):
        assert is_singular_at(f, coordinate_point(i, F3))
    assert not is_singular_at(f, ProjPoint.make([1, 1, 0, 0, 0], F3))


def test_classify_d4():
    print_separator("CLASIFICACIÓN D4")
    f = parse_poly(CUBIC_3D4, F3)
    report = classify_ade(f, coordinate_point(1, F3))
    assert report.type == ADEType('D', 4)
    assert report.corank == 2
    assert report.to_json()['chart_convention'] == 'first-nonzero-coordinate'
    print(f"✅ {report.to_json()}")


def test_classify_a_series():
    f = parse_poly(CUBIC_2A5, Q)
    assert classify_ade(f, coordinate_point(1, Q)).type == ADEType('A', 5)
    g = parse_poly(CUBIC_2A2, Q)
    assert classify_ade(g, coordinate_point(2, Q)).type == ADEType('A', 2)
    node = parse_poly('x1*(x2*x3 + x4*x5) + x2**3 + x3**3 + x4**3 + x5**3', Q)
    report = classify_ade(node, coordinate_point(1, Q))
    assert report.type == ADEType('A', 1) and report.corank == 0


def test_classify_off_coordinate_point():
    """Los cuatro nodos de (x1²-x3²)x4 + (x2²-x3²)x5 + x3x4x5"""
    f = parse_poly('(x1**2 - x3**2)*x4 + (x2**2 - x3**2)*x5 + x3*x4*x5', Q)
    points = [ProjPoint.make(c, Q) for c in ([1, 1, 1, 0, 0], [1, -1, -1, 0, 0],
                                             [1, -1, 1, 0, 0], [1, 1, -1, 0, 0])]
    points += [coordinate_point(4, Q), coordinate_point(5, Q)]
    _, config = singular_configuration(f, points)
    assert config == parse_config('2A3+4A1')


def test_classification_errors():
    f = parse_poly(CUBIC_3D4, F3)
    with pytest.raises(NotSingular):
        classify_ade(f, ProjPoint.make([1, 1, 0, 0, 0], F3))
    with pytest.raises(TruncationInsufficient):
        classify_ade(parse_poly(CUBIC_2A5, Q), coordinate_point(1, Q), truncation=4)
    # singular a lo largo de rectas: no es aislado
    with pytest.raises(UnsupportedType):
        classify_ade(parse_poly('x1*x2*x3', Q), coordinate_point(1, Q))


def test_binary_cubic_squarefree():
    x = variables(Q, 2)
    assert binary_cubic_squarefree(x[0] ** 3 + x[1] ** 3)
    assert binary_cubic_squarefree(x[0] * x[1] * (x[0] + x[1]))
    assert not binary_cubic_squarefree(x[0] ** 2 * x[1])
    assert not binary_cubic_squarefree((x[0] + x[1]) ** 2 * (x[0] - x[1]))


def test_move_to_origin():
    for q in (coordinate_point(4, Q), ProjPoint.make([1, -1, 1, 0, 0], Q)):
        T = move_to_origin(q)
        assert transform_point(q, T) == coordinate_point(1, Q)
    f = parse_poly(CUBIC_2A2, Q)
    T = move_to_origin(coordinate_point(2, Q))
    moved = substitute(f, T.inverse())
    assert classify_ade(moved, coordinate_point(1, Q)).type == ADEType('A', 2)


def test_projective_point_count():
    for p, n in ((5, 3), (7, 5)):
        total = sum(block.shape[0] for _, block in projective_points(p, n))
        assert total == (p ** n - 1) // (p - 1)


def test_scan_matches_declared_points():
    print_separator("BARRIDO MÓDULO p")
    f = parse_poly(CUBIC_3D4, F3)
    points = [coordinate_point(i, F3) for i in (1, 2, 3)]
    for p in (7, 13):
        result = compare_scan(f, points, p)
        assert result['match'], result
        print(f"✅ F_{p}: {result['found']}")


def test_scan_detects_missing_point():
    f = parse_poly(CUBIC_2A2, Q)
    result = compare_scan(f, [coordinate_point(1, Q)], 7)
    assert not result['match']
    assert [0, 1, 0, 0, 0] in result['found']


def test_scan_rejects_small_primes():
    f = parse_poly(CUBIC_2A2, Q)
    with pytest.raises(BadPrime):
        modp_singular_scan(f, 3)
    with pytest.raises(BadPrime):
        modp_singular_scan(parse_poly(CUBIC_3D4, F3), 5)


def random_change_fixing(i, field, rng):
    """Cambio lineal invertible aleatorio con e_i·T = e_i"""
    while True:
        rows = [[rng.choice((-1, 0, 0, 1, 2)) for _ in range(5)] for _ in range(5)]
        rows[i - 1] = [1 if k == i - 1 else 0 for k in range(5)]
        try:
            return LinearChange(field, rows)
        except NotInvertible:
            continue


def test_classification_stable_under_conjugation():
    """El tipo ADE no cambia por cambios de coordenadas que fijan el punto"""
    print_separator("ESTABILIDAD DE LA CLASIFICACIÓN")
    rng = random.Random(2718)
    germs = [
        (CUBIC_3D4, F3, 1, ADEType('D', 4)),
        (CUBIC_2A5, Q, 1, ADEType('A', 5)),
        (CUBIC_2A2, Q, 2, ADEType('A', 2)),
    ]
    for text, field, i, expected in germs:
        f = parse_poly(text, field)
        point = coordinate_point(i, field)
        for _ in range(20):
            T = random_change_fixing(i, field, rng)
            assert transform_point(point, T) == point
            assert classify_ade(substitute(f, T), point).type == expected
        print(f"✅ {expected} estable en 20 conjugados")


if __name__ == '__main__':
    for name, func in list(globals().items()):
        if name.startswith('test_') and callable(func):
            func()
    print("\n🎉 PRUEBAS DE singularities COMPLETADAS")
