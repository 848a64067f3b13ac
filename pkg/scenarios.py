"""
Escenarios del catálogo: carga y validación de los JSON, ejecución de
todas las verificaciones de una cúbica y generación de reportes.

Cada paso del pipeline se ejecuta aunque los anteriores fallen; los
errores quedan registrados en el reporte con su error_type.
"""

import os
import re
import json
import logging
from dataclasses import dataclass, field as dc_field

from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from errors import ToolkitError, SchemaError, FieldMismatch, NotStable, GroupTooLarge
from toolkit_config import BASE_DIR, get_config
from numfield import field_from_json, parse_number
from multipoly import LinearChange, read_poly
from singularities import (
    ProjPoint, is_singular_at, classify_ade, move_to_origin, compare_scan,
)
from autgroups import (
    ProjMatrix, invariance_scalar, element_order, group_closure, structure_invariants,
    StructureInvariants, named_group_invariants, identify, point_permutation,
    permutation_cycles, singular_point_action,
)
from glattice import (
    FPLattice, FiniteAbelianGroup, fin_group_from_matrix_group, quotient_lattice,
    plane_action_rows, permutation_module, dual_lattice, h0_rank, h1, h2,
)
from degeneration import ADEType, SingConfig, parse_config, FIGURE_NODES
from projection import ComponentClaim, defect_from_claim, component_class_action, defect_table

logger = logging.getLogger(__name__)

SCHEMA_PATH = os.path.join(BASE_DIR, 'docs', 'scenario.schema.json')
SCHEMA_VERSION = 1
MIN_SCAN_MATCHES = 2

# Valor de referencia de H^1 por configuración; las demás del catálogo son triviales
H1_REFERENCE = {'2A5': 'Z/2', '2D4+2A1': 'Z/2', '3D4': 'Z/3'}


@dataclass
class LatticeSpec:
    name: str
    ambient_rank: int
    relations: list
    labels: list
    derive: str = None
    planes: list = None
    actions: dict = dc_field(default_factory=dict)
    expected_actions: dict = dc_field(default_factory=dict)


@dataclass
class SubgroupTest:
    name: str
    generators: list
    lattice: str
    expected_h1: tuple = None
    expected_h2: tuple = None
    expected_pic_agrees: bool = None


@dataclass
class ConeData:
    ideals: list
    linking_quadrics: list
    basis: list
    classes: list
    hyperplane: list


@dataclass
class ProjectionClaim:
    point: int
    claim: ComponentClaim


@dataclass
class Scenario:
    name: str
    title: str
    path: str
    field: object
    cubic: object
    points: list
    expected_config: object
    scan_primes: list
    generators: dict
    expected_group: dict
    lattices: dict
    subgroup_tests: list
    cones: ConeData = None
    projection_claims: list = dc_field(default_factory=list)
    exceptional_divisors: list = None

    def exceptional_counts(self, point_types=None):
        """Divisores excepcionales por punto: n para A_n y D_n"""
        if self.exceptional_divisors:
            return list(self.exceptional_divisors)
        if not point_types:
            return None
        return [ADEType.parse(t).index for t in point_types]


# ============================================================================
# CARGA
# ============================================================================

_VALIDATOR = None


def _validator():
    global _VALIDATOR
    if _VALIDATOR is None:
        with open(SCHEMA_PATH, encoding='utf-8') as fh:
            _VALIDATOR = Draft202012Validator(json.load(fh))
    return _VALIDATOR


def _pointer(path):
    return '/' + '/'.join(str(p) for p in path)


def validate_document(data):
    """Valida contra el esquema; el primer error relevante lleva su JSON pointer"""
    error = best_match(_validator().iter_errors(data))
    if error is not None:
        raise SchemaError(f"Escenario inválido: {error.message}", _pointer(error.absolute_path))


_W_TOKEN = re.compile(r'\bw\b')


def _uses_generator(value):
    if isinstance(value, str):
        return bool(_W_TOKEN.search(value))
    if isinstance(value, (list, tuple)):
        return any(_uses_generator(v) for v in value)
    if isinstance(value, dict):
        return any(_uses_generator(v) for v in value.values())
    return False


def _parse(pointer, builder, *args):
    """Convierte errores de lectura en SchemaError con la ubicación"""
    try:
        return builder(*args)
    except SchemaError:
        raise
    except FieldMismatch:
        raise
    except (ToolkitError, ValueError, TypeError, SyntaxError) as e:
        message = e.message if isinstance(e, ToolkitError) else str(e)
        raise SchemaError(f"No se pudo leer el valor: {message}", pointer)


def _read_ideal(gens, field, pointer):
    return [_parse(f"{pointer}/{k}", read_poly, g, field) for k, g in enumerate(gens)]


def _read_point(coords, field):
    return ProjPoint.make([parse_number(c, field) for c in coords], field)


def _read_change(images, field, pointer):
    change = _parse(pointer, LinearChange.from_images, images, field)
    return ProjMatrix.from_change(change)


def _check_rows(rows, size, pointer):
    if len(rows) != size or any(len(r) != size for r in rows):
        raise SchemaError(f"Se esperaba una matriz {size}x{size}", pointer)


def _read_lattice(name, data, field):
    base = f"/lattices/{name}"
    ambient = data['ambient_rank']
    relations = data.get('relations', [])
    for k, row in enumerate(relations):
        if len(row) != ambient:
            raise SchemaError("La relación no tiene la longitud del ambiente", f"{base}/relations/{k}")
    labels = data.get('labels') or [f"e{k + 1}" for k in range(ambient)]
    if len(labels) != ambient:
        raise SchemaError("Hace falta una etiqueta por generador del ambiente", f"{base}/labels")
    planes = None
    if data.get('derive') == 'planes':
        if 'planes' not in data:
            raise SchemaError("Derivar por planos requiere la lista 'planes'", f"{base}/planes")
        planes = [_read_ideal(gens, field, f"{base}/planes/{k}") for k, gens in enumerate(data['planes'])]
        if len(planes) > ambient:
            raise SchemaError("Hay más planos que generadores en el ambiente", f"{base}/planes")
    for key in ('actions', 'expected_actions'):
        for label, rows in data.get(key, {}).items():
            _check_rows(rows, ambient, f"{base}/{key}/{label}")
    return LatticeSpec(
        name=name,
        ambient_rank=ambient,
        relations=relations,
        labels=labels,
        derive=data.get('derive'),
        planes=planes,
        actions=dict(data.get('actions', {})),
        expected_actions=dict(data.get('expected_actions', {})),
    )


def build_scenario(data, path=''):
    """Resuelve un documento ya validado por el esquema"""
    field = _parse('/field', field_from_json, data['field'])
    if field.is_rational:
        for key in ('cubic', 'points', 'generators', 'cones', 'lattices', 'projection_claims'):
            if _uses_generator(data.get(key)):
                raise FieldMismatch(
                    f"'{key}' usa el generador w pero el cuerpo es Q", key=key, field=field.label)

    cubic = _parse('/cubic', read_poly, data['cubic'], field)
    if not cubic.is_homogeneous(3):
        raise SchemaError("La cúbica no es homogénea de grado 3", '/cubic')

    points = [_parse(f"/points/{i}", _read_point, coords, field)
              for i, coords in enumerate(data['points'])]
    expected_config = _parse('/expected_config', parse_config, data['expected_config'])
    if len(expected_config.types) != len(points):
        raise SchemaError("La configuración esperada no tiene un tipo por punto", '/expected_config')

    generators = {name: _read_change(images, field, f"/generators/{name}")
                  for name, images in data.get('generators', {}).items()}

    cones = None
    if 'cones' in data:
        raw = data['cones']
        ideals = [_read_ideal(g, field, f"/cones/ideals/{k}") for k, g in enumerate(raw['ideals'])]
        quadrics = [None if q is None else _parse(f"/cones/linking_quadrics/{k}", read_poly, q, field)
                    for k, q in enumerate(raw['linking_quadrics'])]
        if len(quadrics) != len(ideals) or len(raw['classes']) != len(ideals):
            raise SchemaError("Cada cono necesita su cuádrica y su clase", '/cones')
        cones = ConeData(ideals, quadrics, list(raw['basis']), raw['classes'], raw['hyperplane'])

    lattices = {name: _read_lattice(name, spec, field) for name, spec in data.get('lattices', {}).items()}
    for name, spec in lattices.items():
        if spec.derive == 'cones':
            if cones is None:
                raise SchemaError("Derivar por conos requiere el bloque 'cones'", f"/lattices/{name}/derive")
            if len(cones.basis) != spec.ambient_rank:
                raise SchemaError("La base de conos no coincide con el ambiente", f"/lattices/{name}")

    tests = []
    for k, raw in enumerate(data.get('subgroup_tests', [])):
        pointer = f"/subgroup_tests/{k}"
        missing = [g for g in raw['generators'] if g not in generators]
        if missing:
            raise SchemaError(f"Generadores desconocidos: {', '.join(missing)}", f"{pointer}/generators")
        if raw['lattice'] not in lattices:
            raise SchemaError(f"Retículo desconocido: {raw['lattice']}", f"{pointer}/lattice")
        spec = lattices[raw['lattice']]
        if spec.derive is None:
            undefined = [g for g in raw['generators'] if g not in spec.actions]
            if undefined:
                raise SchemaError(f"El retículo no define la acción de {', '.join(undefined)}",
                                  f"{pointer}/generators")
        tests.append(SubgroupTest(
            name=raw['name'],
            generators=list(raw['generators']),
            lattice=raw['lattice'],
            expected_h1=tuple(raw['expected_h1']) if 'expected_h1' in raw else None,
            expected_h2=tuple(raw['expected_h2']) if 'expected_h2' in raw else None,
            expected_pic_agrees=raw.get('expected_pic_agrees'),
        ))

    claims = []
    for k, raw in enumerate(data.get('projection_claims', [])):
        pointer = f"/projection_claims/{k}"
        if raw['point'] >= len(points):
            raise SchemaError("Índice de punto fuera de rango", f"{pointer}/point")
        components = [_read_ideal(gens, field, f"{pointer}/components/{j}")
                      for j, gens in enumerate(raw['components'])]
        claim = _parse(pointer, ComponentClaim, components, raw.get('expected_defect'))
        claims.append(ProjectionClaim(raw['point'], claim))

    exceptional = data.get('exceptional_divisors')
    if exceptional is not None and len(exceptional) != len(points):
        raise SchemaError("Hace falta un número de divisores por punto", '/exceptional_divisors')

    return Scenario(
        name=data['name'],
        title=data.get('title', data['name']),
        path=path,
        field=field,
        cubic=cubic,
        points=points,
        expected_config=expected_config,
        scan_primes=list(data.get('scan_primes', [])),
        generators=generators,
        expected_group=dict(data.get('expected_group', {})),
        lattices=lattices,
        subgroup_tests=tests,
        cones=cones,
        projection_claims=claims,
        exceptional_divisors=exceptional,
    )


def load_scenario(path, validate=False, truncation=None):
    """
    Lee y resuelve un escenario. Con validate=True se reclasifican los
    puntos y una configuración distinta de la declarada es un SchemaError.
    """
    try:
        with open(path, encoding='utf-8') as fh:
            data = json.load(fh)
    except json.JSONDecodeError as e:
        raise SchemaError(f"JSON inválido: {e.msg} (línea {e.lineno})", '/')
    validate_document(data)
    scenario = build_scenario(data, path)
    logger.debug(f"Escenario {scenario.name} cargado desde {path}")
    if validate:
        truncation = truncation or get_config().truncation
        found = [classify_ade(scenario.cubic, p, truncation).type for p in scenario.points]
        if SingConfig.of(found) != scenario.expected_config:
            raise SchemaError(
                f"Los puntos clasifican como {SingConfig.of(found)}, no {scenario.expected_config}",
                '/expected_config')
    return scenario


def resolve_scenario_path(name_or_path, catalog_dir=None):
    """Acepta una ruta o el nombre de un escenario del catálogo"""
    if os.path.exists(name_or_path):
        return name_or_path
    catalog_dir = catalog_dir or get_config().catalog_dir
    candidate = os.path.join(catalog_dir, f"{name_or_path}.json")
    if os.path.exists(candidate):
        return candidate
    raise FileNotFoundError(f"No existe el escenario {name_or_path!r}")


def load_catalog(catalog_dir=None, validate=False):
    """Todos los escenarios del directorio, en orden alfabético"""
    catalog_dir = catalog_dir or get_config().catalog_dir
    names = sorted(f for f in os.listdir(catalog_dir) if f.endswith('.json'))
    scenarios = [load_scenario(os.path.join(catalog_dir, f), validate) for f in names]
    logger.info(f"Catálogo con {len(scenarios)} escenarios en {catalog_dir}")
    return scenarios


# ============================================================================
# EJECUCIÓN
# ============================================================================

def _step(name, func, *args):
    """Ejecuta un paso y convierte cualquier fallo en un registro del reporte"""
    try:
        return func(*args)
    except ToolkitError as e:
        logger.warning(f"Paso {name}: {e.message}")
        return {'ok': False, **e.to_dict()}
    except Exception as e:
        logger.exception(f"Error inesperado en el paso {name}")
        return {'ok': False, 'status': 'error', 'message': str(e), 'error_type': 'internal'}


def check_singularities(scenario, truncation):
    points = []
    types = []
    for point in scenario.points:
        entry = {'point': point.to_json(), 'singular': is_singular_at(scenario.cubic, point)}
        try:
            report = classify_ade(scenario.cubic, point, truncation)
            entry.update(report.to_json())
            types.append(report.type)
        except ToolkitError as e:
            entry.update(e.to_dict())
        points.append(entry)

    config = str(SingConfig.of(types)) if len(types) == len(scenario.points) else None
    expected = str(scenario.expected_config)
    levels = {text: level for _, text, level in FIGURE_NODES}
    level = levels.get(expected)
    return {
        'ok': config == expected and (level is None or level == scenario.expected_config.total_milnor),
        'points': points,
        'point_types': [str(t) for t in types] if config else None,
        'config': config,
        'expected_config': expected,
        'total_milnor': scenario.expected_config.total_milnor,
        'figure_level': level,
    }


def check_scans(scenario, primes):
    """
    Política multiprimo: un punto declarado ausente refuta; puntos extra se
    anotan como mala reducción; hacen falta dos primos con coincidencia exacta.
    """
    results = []
    matches = 0
    refuted = False
    for p in primes:
        try:
            outcome = compare_scan(scenario.cubic, scenario.points, p)
        except ToolkitError as e:
            logger.info(f"Primo {p} descartado en {scenario.name}: {e.message}")
            results.append({'prime': p, 'skipped': e.error_type})
            continue
        found = {tuple(pt) for pt in outcome['found']}
        declared = {tuple(pt) for pt in outcome['declared']}
        missing = sorted(declared - found)
        extra = sorted(found - declared)
        if missing:
            refuted = True
        elif extra:
            logger.info(f"Mala reducción en p = {p}: {len(extra)} puntos extra")
        if outcome['match']:
            matches += 1
        results.append({
            'prime': p,
            'match': outcome['match'],
            'found': len(found),
            'missing': [list(pt) for pt in missing],
            'extra': [list(pt) for pt in extra[:5]],
        })
    return {
        'ok': not refuted and matches >= MIN_SCAN_MATCHES,
        'matches': matches,
        'refuted': refuted,
        'primes': results,
    }


def check_automorphisms(scenario, cap):
    if not scenario.generators:
        return {'ok': True, 'generators': {}, 'skipped': 'sin generadores'}
    generators = {}
    all_invariant = True
    for name, M in sorted(scenario.generators.items()):
        try:
            scalar = invariance_scalar(M, scenario.cubic)
            generators[name] = {'invariant': True, 'scalar': str(scalar), 'order': element_order(M, cap)}
        except ToolkitError as e:
            all_invariant = False
            generators[name] = {'invariant': False, **e.to_dict()}
    if not all_invariant:
        return {'ok': False, 'generators': generators, 'message': 'algún generador no preserva la cúbica'}

    group = group_closure([scenario.generators[n] for n in sorted(scenario.generators)], cap)
    invariants = structure_invariants(group)
    expected = scenario.expected_group
    result = {
        'generators': generators,
        'order': group.order,
        'invariants': invariants.to_json(),
        'identified_as': identify(invariants),
        # Solo el subgrupo finito generado; la descomposición como producto no se comprueba
        'scope': 'finite_subgroup_only',
    }
    ok = expected.get('order', group.order) == group.order
    reference = None
    if 'invariants' in expected:
        reference = StructureInvariants.from_json(expected['invariants'])
    elif 'model' in expected:
        reference = named_group_invariants(expected['model'])
    if reference is not None:
        mismatches = invariants.compare(reference)
        result['mismatches'] = mismatches
        ok = ok and not mismatches

    perms, kernel = singular_point_action(group, scenario.points)
    result['point_action'] = {
        name: permutation_cycles(point_permutation(scenario.generators[name], scenario.points))
        for name in sorted(scenario.generators)
    }
    result['orbits'] = _orbits(perms, len(scenario.points))
    result['kernel_order'] = kernel.order
    if 'kernel_order' in expected:
        ok = ok and kernel.order == expected['kernel_order']
    result['ok'] = ok
    return result


def _orbits(perms, n):
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for perm in perms:
        for i, j in enumerate(perm):
            parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i + 1)
    return sorted(groups.values())


def derived_rows(scenario, spec, label):
    """Filas de la acción de un generador sobre el ambiente del retículo"""
    M = scenario.generators[label]
    if label in spec.actions:
        return spec.actions[label], None
    if spec.derive == 'planes':
        return plane_action_rows(M.change, spec.planes, spec.ambient_rank).tolist(), None
    if spec.derive == 'cones':
        cones = scenario.cones
        rows, explanation = component_class_action(
            M.change, cones.ideals, cones.linking_quadrics, cones.basis, cones.classes, cones.hyperplane)
        return rows, explanation
    raise NotStable(f"El retículo {spec.name} no define la acción de {label}", generator=label)


def exceptional_module(scenario, group, labels, point_types=None):
    """
    Módulo de permutaciones de los divisores excepcionales: un bloque por
    punto, permutado en bloque según la acción sobre los puntos.
    """
    counts = scenario.exceptional_counts(point_types)
    if counts is None:
        raise NotStable("Sin tipos clasificados no se conoce el número de divisores")
    offsets = [sum(counts[:i]) for i in range(len(counts))]
    perms = {}
    for label in labels:
        perm = point_permutation(scenario.generators[label], scenario.points)
        image = []
        for i, target in enumerate(perm):
            if counts[target] != counts[i]:
                raise NotStable("Puntos de tipos distintos en la misma órbita")
            image.extend(offsets[target] + k for k in range(counts[i]))
        perms[label] = image
    return permutation_module(group, perms)


def run_subgroup_test(scenario, test, cap, limit, point_types=None):
    spec = scenario.lattices[test.lattice]
    matrices = [scenario.generators[g] for g in test.generators]
    closure = group_closure(matrices, cap)
    group = fin_group_from_matrix_group(closure, test.generators)

    actions = {}
    explanations = {}
    action_checks = {}
    for label in test.generators:
        rows, explanation = derived_rows(scenario, spec, label)
        actions[label] = rows
        if explanation:
            explanations[label] = explanation
        if label in spec.expected_actions:
            action_checks[label] = [list(map(int, r)) for r in rows] == spec.expected_actions[label]

    presentation = FPLattice(spec.ambient_rank, spec.relations, actions, spec.labels)
    lattice = quotient_lattice(presentation, group)
    h1_group = h1(group, lattice, limit)
    h1_dual = h1(group, dual_lattice(lattice), limit)
    result = {
        'name': test.name,
        'generators': test.generators,
        'lattice': test.lattice,
        'group_order': group.order,
        'rank': lattice.rank,
        'h0_rank': h0_rank(lattice),
        'h1': h1_group.to_json(),
        'h1_str': str(h1_group),
        'h1_dual': h1_dual.to_json(),
        'actions': {k: [list(map(int, r)) for r in v] for k, v in actions.items()},
    }
    if explanations:
        result['explanations'] = explanations
    if action_checks:
        result['action_checks'] = action_checks

    ok = all(action_checks.values())
    if test.expected_h1 is not None:
        ok = ok and h1_group == FiniteAbelianGroup.from_factors(test.expected_h1)
        result['expected_h1'] = list(test.expected_h1)
    if test.expected_h2 is not None:
        h2_group = h2(group, lattice, limit)
        result['h2'] = h2_group.to_json()
        result['expected_h2'] = list(test.expected_h2)
        ok = ok and h2_group == FiniteAbelianGroup.from_factors(test.expected_h2)

    # 0 -> ⊕ZE_i -> Pic -> Cl -> 0 con H^1(⊕ZE_i) = 0: H^1(Cl) = 0 anula H^1(Pic),
    # y H^2(⊕ZE_i) = 0 da H^1(Pic) = H^1(Cl)
    try:
        exceptional = exceptional_module(scenario, group, test.generators, point_types)
        h2_exc = h2(group, exceptional, limit)
        result['exceptional_h2'] = h2_exc.to_json()
        if h1_group.is_trivial():
            result['pic_agrees'], result['pic_reason'] = True, 'h1_cl_trivial'
        elif h2_exc.is_trivial():
            result['pic_agrees'], result['pic_reason'] = True, 'h2_exceptional_trivial'
        else:
            result['pic_agrees'], result['pic_reason'] = False, 'undetermined'
    except (GroupTooLarge, NotStable) as e:
        result['pic_agrees'] = None
        result['pic_note'] = e.message
    if test.expected_pic_agrees is not None:
        result['expected_pic_agrees'] = test.expected_pic_agrees
        ok = ok and result['pic_agrees'] == test.expected_pic_agrees
    result['ok'] = ok
    logger.info(f"{scenario.name}/{test.name}: H^1 = {h1_group}, pic_agrees = {result['pic_agrees']}")
    return result


def run_projection_claim(scenario, entry, primes, truncation):
    q = scenario.points[entry.point]
    move = move_to_origin(q)
    result = defect_from_claim(scenario.cubic, q, entry.claim, primes, move, truncation)
    result['point'] = entry.point
    allowed = defect_table().get(scenario.expected_config)
    if allowed is not None and result['defect'] is not None:
        result['in_defect_table'] = result['defect'] in allowed
        result['ok'] = result['ok'] and result['in_defect_table']
    return result


def run_scenario(scenario, config=None, primes=None):
    """Ejecuta todos los pasos y devuelve el reporte del escenario"""
    config = config or get_config()
    primes = list(primes or scenario.scan_primes or config.primes)
    logger.info(f"Ejecutando escenario {scenario.name}")

    steps = {}
    steps['singularities'] = _step('singularities', check_singularities, scenario, config.truncation)
    steps['modp_scan'] = _step('modp_scan', check_scans, scenario, primes)
    steps['automorphisms'] = _step('automorphisms', check_automorphisms, scenario, config.cap)
    point_types = steps['singularities'].get('point_types')
    steps['cohomology'] = [
        {'name': t.name, **_step(f"cohomology/{t.name}", run_subgroup_test, scenario, t,
                                 config.cap, config.bar_limit, point_types)}
        for t in scenario.subgroup_tests
    ]
    steps['projection'] = [
        _step(f"projection/{k}", run_projection_claim, scenario, entry, primes, config.truncation)
        for k, entry in enumerate(scenario.projection_claims)
    ]

    ok = (steps['singularities'].get('ok', False)
          and steps['modp_scan'].get('ok', False)
          and steps['automorphisms'].get('ok', False)
          and all(t.get('ok', False) for t in steps['cohomology'])
          and all(c.get('ok', False) for c in steps['projection']))
    if not ok:
        logger.warning(f"El escenario {scenario.name} tiene verificaciones fallidas")
    return {
        'name': scenario.name,
        'title': scenario.title,
        'field': scenario.field.label,
        'expected_config': str(scenario.expected_config),
        'ok': bool(ok),
        'steps': steps,
    }


def run_catalog(config=None, names=None, primes=None):
    config = config or get_config()
    scenarios = load_catalog(config.catalog_dir)
    if names:
        scenarios = [s for s in scenarios if s.name in names]
    return [run_scenario(s, config, primes) for s in scenarios]


# ============================================================================
# REPORTES
# ============================================================================

def defect_rows(reports):
    """Una fila por afirmación de proyección: configuración, escenario, defecto"""
    rows = []
    for report in reports:
        for claim in report['steps'].get('projection', []):
            rows.append({
                'config': report['expected_config'],
                'scenario': report['name'],
                'point': claim.get('point'),
                'components': claim.get('components'),
                'defect': claim.get('defect'),
                'expected': claim.get('expected_defect'),
                'ok': bool(claim.get('ok')),
            })
    rows.sort(key=lambda r: (parse_config(r['config']).total_milnor, r['config'], r['scenario']))
    return rows


def h1_obstruction_table(reports):
    """
    H^1 de Cl(X) por configuración, contando solo pruebas en que Cl(X) y
    Pic(X̃) concuerdan, frente al valor de referencia.
    """
    computed = {}
    for report in reports:
        config = report['expected_config']
        found = computed.setdefault(config, set())
        for test in report['steps'].get('cohomology', []):
            if test.get('pic_agrees') and test.get('h1'):
                found.add(str(FiniteAbelianGroup.from_factors(test['h1'])))
    rows = []
    for config in sorted(computed, key=lambda c: (parse_config(c).total_milnor, c)):
        value = ', '.join(sorted(computed[config])) or '0'
        reference = H1_REFERENCE.get(config, '0')
        rows.append({
            'config': config,
            'computed': value,
            'reference': reference,
            'obstruction': value != '0',
            'agrees': value == reference,
        })
    return rows


def summary(reports):
    return {
        'schema_version': SCHEMA_VERSION,
        'scenarios': len(reports),
        'passed': sum(1 for r in reports if r['ok']),
        'all_ok': all(r['ok'] for r in reports),
        'defects': defect_rows(reports),
        'h1_obstructions': h1_obstruction_table(reports),
        'reports': sorted(reports, key=lambda r: r['name']),
    }


def _markdown(reports):
    lines = ['# Reporte del catálogo de cúbicas', '']
    lines.append(f"Escenarios: {len(reports)}, correctos: {sum(1 for r in reports if r['ok'])}")
    lines += ['', '## Escenarios', '', '| Escenario | Configuración | Cuerpo | Resultado |', '|---|---|---|---|']
    for r in sorted(reports, key=lambda r: r['name']):
        lines.append(f"| {r['name']} | {r['expected_config']} | {r['field']} | {'OK' if r['ok'] else 'FALLA'} |")
    lines += ['', '## Defecto por configuración', '',
              '| Configuración | Escenario | Componentes | Defecto | Esperado | Resultado |',
              '|---|---|---|---|---|---|']
    for row in defect_rows(reports):
        lines.append(f"| {row['config']} | {row['scenario']} | {row['components']} | {row['defect']} "
                     f"| {row['expected']} | {'OK' if row['ok'] else 'FALLA'} |")
    lines += ['', '## Obstrucciones H1', '',
              '| Configuración | H1 calculado | Referencia | Obstrucción | Coincide |', '|---|---|---|---|---|']
    for row in h1_obstruction_table(reports):
        lines.append(f"| {row['config']} | {row['computed']} | {row['reference']} "
                     f"| {'sí' if row['obstruction'] else 'no'} | {'sí' if row['agrees'] else 'no'} |")
    return '\n'.join(lines) + '\n'


def render_report(reports, fmt='markdown'):
    if fmt == 'json':
        return json.dumps(summary(reports), indent=2, sort_keys=True, ensure_ascii=False) + '\n'
    if fmt == 'markdown':
        return _markdown(reports)
    raise ValueError(f"Formato de reporte desconocido: {fmt}")


def emit_report(reports, fmt='markdown', path=None):
    """Escribe el reporte; sin ruta lo deja en el directorio de reportes"""
    text = render_report(reports, fmt)
    if path is None:
        report_dir = get_config().report_dir
        os.makedirs(report_dir, exist_ok=True)
        path = os.path.join(report_dir, 'reporte.json' if fmt == 'json' else 'reporte.md')
    with open(path, 'w', encoding='utf-8') as fh:
        fh.write(text)
    logger.info(f"Reporte escrito en {path}")
    return path
