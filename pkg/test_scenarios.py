#!/usr/bin/env python3
"""
Pruebas de carga de escenarios, ejecución del pipeline completo y reportes
"""

import os
import time
import json

import pytest

from errors import SchemaError, FieldMismatch
from toolkit_config import ToolkitConfig, BASE_DIR
from degeneration import parse_config
from autgroups import group_closure
from glattice import fin_group_from_matrix_group, h2, permutation_action
from scenarios import (
    load_scenario, load_catalog, resolve_scenario_path, run_scenario, run_catalog, check_scans,
    check_singularities, exceptional_module, render_report, emit_report, summary,
    h1_obstruction_table, defect_rows,
)

CATALOG = os.path.join(BASE_DIR, 'catalog')
CONFIG = ToolkitConfig(catalog_dir=CATALOG)


def print_separator(title):
    print("\n" + "=" * 60)
    print(title)
    print("=" * 60)


def catalog_document(name):
    with open(os.path.join(CATALOG, f"{name}.json"), encoding='utf-8') as fh:
        return json.load(fh)


def write_document(tmp_path, data, name='escenario.json'):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding='utf-8')
    return str(path)


# ============================================================================
# CARGA
# ============================================================================

def test_load_3d4():
    scenario = load_scenario(resolve_scenario_path('3d4', CATALOG))
    assert scenario.field.degree == 2
    assert len(scenario.points) == 3
    assert scenario.expected_config == parse_config('3D4')
    assert sorted(scenario.generators) == ['s12', 's123', 's45']
    lattice = scenario.lattices['planes']
    assert lattice.derive == 'planes' and len(lattice.planes) == 9
    assert scenario.projection_claims[0].claim.expected_defect == 4
    assert scenario.exceptional_counts(['D4', 'D4', 'D4']) == [4, 4, 4]


def test_load_catalog():
    scenarios = load_catalog(CATALOG)
    assert len(scenarios) == 23
    names = [s.name for s in scenarios]
    assert names == sorted(names)
    assert {'3d4', '2a5_b0', '2a5_b1', '5a2', '2d4_case6'} <= set(names)


def test_validate_reclassifies_points(tmp_path):
    load_scenario(resolve_scenario_path('2a4', CATALOG), validate=True)
    data = catalog_document('2a2')
    data['expected_config'] = '2A1'
    with pytest.raises(SchemaError) as info:
        load_scenario(write_document(tmp_path, data), validate=True)
    assert info.value.pointer == '/expected_config'


def test_schema_errors(tmp_path):
    data = catalog_document('2a2')
    data['points'][0] = [1, 0, 0, 0]
    with pytest.raises(SchemaError) as info:
        load_scenario(write_document(tmp_path, data))
    assert info.value.pointer.startswith('/points')

    data = catalog_document('2a2')
    data['subgroup_tests'][0]['generators'] = ['desconocido']
    with pytest.raises(SchemaError) as info:
        load_scenario(write_document(tmp_path, data))
    assert info.value.pointer == '/subgroup_tests/0/generators'

    data = catalog_document('2a2')
    data['cubic'] = 'x1*x2 + x3**3'
    with pytest.raises(SchemaError) as info:
        load_scenario(write_document(tmp_path, data))
    assert info.value.pointer == '/cubic'

    path = tmp_path / 'roto.json'
    path.write_text('{"name": ', encoding='utf-8')
    with pytest.raises(SchemaError):
        load_scenario(str(path))

    with pytest.raises(FileNotFoundError):
        resolve_scenario_path('no_existe', CATALOG)


def test_generator_over_rationals(tmp_path):
    data = catalog_document('2a2')
    data['cubic'] = data['cubic'] + ' + w*x3*x4*x5'
    with pytest.raises(FieldMismatch):
        load_scenario(write_document(tmp_path, data))


# ============================================================================
# PIPELINE
# ============================================================================

def test_run_3d4():
    print_separator("ESCENARIO 3D4")
    report = run_scenario(load_scenario(resolve_scenario_path('3d4', CATALOG)), CONFIG)
    steps = report['steps']
    assert steps['singularities']['config'] == '3D4'
    assert steps['modp_scan']['ok'] and steps['modp_scan']['matches'] >= 2
    assert steps['automorphisms']['order'] == 12
    assert steps['automorphisms']['kernel_order'] == 2
    assert steps['automorphisms']['identified_as'] == ['C2xS3']
    test = steps['cohomology'][0]
    assert test['h1'] == [3] and test['pic_agrees'] is True
    assert steps['projection'][0]['defect'] == 4
    assert report['ok'], json.dumps(steps, indent=2, default=str)
    print(f"✅ {report['name']}: {report['expected_config']}")


def test_run_2d4_2a1():
    report = run_scenario(load_scenario(resolve_scenario_path('2d4_2a1', CATALOG)), CONFIG)
    by_name = {t['name']: t for t in report['steps']['cohomology']}
    assert by_name['s12_34']['h1'] == [2]
    assert by_name['s12_34']['pic_agrees'] is True
    assert by_name['s12']['h1'] == []
    assert report['steps']['automorphisms']['order'] == 16
    assert report['ok']


def test_run_2a5_cone_actions():
    report = run_scenario(load_scenario(resolve_scenario_path('2a5_b0', CATALOG)), CONFIG)
    by_name = {t['name']: t for t in report['steps']['cohomology']}
    assert by_name['s1245']['actions']['s1245'] == [[1, 0], [2, -1]]
    assert by_name['s1245']['action_checks'] == {'s1245': True}
    assert by_name['s1245']['h1'] == [2]
    # el intercambio ingenuo de los conos no ve la obstrucción
    assert by_name['s1245_naive']['h1'] == []
    # η2σ no anula H^2 del módulo excepcional, pero H^1(Cl) = 0 ya basta
    twisted = by_name['eta2_s1245']
    assert twisted['h1'] == []
    assert twisted['exceptional_h2'] != []
    assert twisted['pic_agrees'] is True and twisted['pic_reason'] == 'h1_cl_trivial'
    assert by_name['s1245']['pic_reason'] == 'h2_exceptional_trivial'
    assert report['ok'], json.dumps(report['steps'], indent=2, default=str)


def test_pic_undetermined_with_torsion_on_both_sides():
    report = run_scenario(load_scenario(resolve_scenario_path('2d4_3a1', CATALOG)), CONFIG)
    test = report['steps']['cohomology'][0]
    assert test['h1'] == [3]
    assert test['exceptional_h2'] != []
    assert test['pic_agrees'] is False and test['pic_reason'] == 'undetermined'
    assert test['ok']


def test_exceptional_h2_by_stabilizers_is_fast():
    """El módulo excepcional de 2D4 (caso 5) sale por órbitas, sin complejo bar"""
    scenario = load_scenario(resolve_scenario_path('2d4_case5', CATALOG))
    point_types = check_singularities(scenario, 8)['point_types']
    labels = ['eta2', 's12']
    closure = group_closure([scenario.generators[label] for label in labels])
    group = fin_group_from_matrix_group(closure, labels)
    module = exceptional_module(scenario, group, labels, point_types)
    assert permutation_action(module) is not None
    start = time.perf_counter()
    result = h2(group, module)
    assert time.perf_counter() - start < 10
    print(f"✅ orden {group.order}, rango {module.rank}: H^2 = {result}")
    report = run_scenario(scenario, CONFIG)
    test = report['steps']['cohomology'][0]
    assert test['pic_agrees'] is True and test['pic_reason'] == 'h1_cl_trivial'
    assert report['ok']


def test_run_5a2():
    """A5 actuando sobre los cinco puntos coordenados"""
    report = run_scenario(load_scenario(resolve_scenario_path('5a2', CATALOG)), CONFIG)
    aut = report['steps']['automorphisms']
    assert aut['order'] == 60 and aut['kernel_order'] == 1
    assert aut['orbits'] == [[1, 2, 3, 4, 5]]
    assert aut['point_action']['sigma'] == '(1 5 4 3 2)'
    assert report['ok']


def test_failed_step_does_not_stop_pipeline(tmp_path):
    data = catalog_document('2a2')
    data['generators']['roto'] = ['2*x1', 'x2', 'x3', 'x4', 'x5']
    report = run_scenario(load_scenario(write_document(tmp_path, data)), CONFIG)
    assert not report['ok']
    aut = report['steps']['automorphisms']
    assert aut['ok'] is False
    assert aut['generators']['roto']['error_type'] == 'not_invariant'
    assert report['steps']['singularities']['ok']
    assert report['steps']['projection'][0]['ok']


def test_scan_policy(tmp_path):
    data = catalog_document('2a2')
    # solo se declara uno de los dos puntos: el otro aparece como extra
    data['points'] = data['points'][:1]
    data['expected_config'] = 'A2'
    data.pop('projection_claims')
    scenario = load_scenario(write_document(tmp_path, data))
    result = check_scans(scenario, [7, 11])
    assert not result['refuted'] and result['matches'] == 0 and not result['ok']

    data = catalog_document('2a2')
    data['points'][1] = [0, 0, 0, 1, 0]
    scenario = load_scenario(write_document(tmp_path, data))
    result = check_scans(scenario, [7, 11])
    assert result['refuted'] and not result['ok']
    assert result['primes'][0]['missing'] == [[0, 0, 0, 1, 0]]

    scenario = load_scenario(resolve_scenario_path('2a2', CATALOG))
    assert not check_scans(scenario, [7])['ok']
    assert check_scans(scenario, [3, 7, 11])['primes'][0]['skipped'] == 'bad_prime'


def test_exceptional_module_blocks():
    scenario = load_scenario(resolve_scenario_path('2d4_2a1', CATALOG))
    point_types = check_singularities(scenario, 8)['point_types']
    assert sorted(point_types) == ['A1', 'A1', 'D4', 'D4']
    closure = group_closure([scenario.generators['s12_34']])
    group = fin_group_from_matrix_group(closure, ['s12_34'])
    module = exceptional_module(scenario, group, ['s12_34'], point_types)
    assert module.rank == 10
    assert h2(group, module).is_trivial()


# ============================================================================
# REPORTES
# ============================================================================

def test_report_is_deterministic(tmp_path):
    scenario = load_scenario(resolve_scenario_path('3d4', CATALOG))
    first = emit_report([run_scenario(scenario, CONFIG)], 'json', str(tmp_path / 'a.json'))
    second = emit_report([run_scenario(scenario, CONFIG)], 'json', str(tmp_path / 'b.json'))
    with open(first, encoding='utf-8') as a, open(second, encoding='utf-8') as b:
        assert a.read() == b.read()


def test_catalog_report_is_deterministic():
    print_separator("DETERMINISMO DEL CATÁLOGO")
    first = run_catalog(CONFIG)
    second = run_catalog(CONFIG)
    assert len(first) == len(load_catalog(CATALOG))
    assert render_report(first, 'json') == render_report(second, 'json')
    assert render_report(first) == render_report(second)
    print(f"✅ {len(first)} escenarios")


def test_report_tables():
    reports = [run_scenario(load_scenario(resolve_scenario_path(name, CATALOG)), CONFIG)
               for name in ('2a2', '3d4')]
    rows = {row['config']: row for row in h1_obstruction_table(reports)}
    assert rows['3D4']['computed'] == 'Z/3' and rows['3D4']['agrees']
    assert rows['2A2']['computed'] == '0' and not rows['2A2']['obstruction']
    defects = defect_rows(reports)
    assert [r['config'] for r in defects] == ['2A2', '3D4']
    markdown = render_report(reports)
    assert '| 3d4 | 3D4 |' in markdown
    with pytest.raises(ValueError):
        render_report(reports, 'html')


def test_empty_report():
    data = summary([])
    assert data['scenarios'] == 0 and data['all_ok']
    assert json.loads(render_report([], 'json'))['reports'] == []
    assert 'Escenarios: 0' in render_report([], 'markdown')


if __name__ == '__main__':
    import tempfile
    import pathlib
    for name, func in list(globals().items()):
        if name.startswith('test_') and callable(func):
            if 'tmp_path' in func.__code__.co_varnames[:func.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as tmp:
                    func(pathlib.Path(tmp))
            else:
                func()
    print("\n🎉 PRUEBAS DE scenarios COMPLETADAS")
