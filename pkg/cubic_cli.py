#!/usr/bin/env python3
"""
Línea de comandos del toolkit de cúbicas
Verifica escenarios del catálogo, clasifica singularidades, calcula
cohomología y defectos, barre módulo p y exporta el diagrama de degeneraciones.

Códigos de salida: 0 si todos los veredictos pasan, 1 si alguno falla,
2 ante errores de entrada.
"""

import sys
import json
import logging
import argparse
from datetime import datetime

from errors import ToolkitError

logger = logging.getLogger('cubic_cli')

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2


def print_banner(config):
    """Muestra el banner de inicio"""
    print("=" * 70)
    print("TOOLKIT DE CÚBICAS SINGULARES")
    print("=" * 70)
    print("Fecha:", datetime.now().strftime("%Y-%m-%d %H:%M:%S"))
    print(f"Catálogo: {config.catalog_dir}")
    print(f"Primos: {', '.join(str(p) for p in config.primes)}  truncación: {config.truncation}  cota: {config.cap}")
    print("=" * 70)


def check_dependencies():
    """Verifica que las dependencias estén instaladas"""
    required_packages = ['sympy', 'numpy', 'networkx', 'jsonschema', 'dotenv']
    missing_packages = []
    for package in required_packages:
        try:
            __import__(package)
        except ImportError:
            missing_packages.append(package)
    if missing_packages:
        print(f"Faltan dependencias: {', '.join(missing_packages)}")
        print("Ejecuta: pip install -r requirements.txt")
        return False
    return True


def field_check():
    """Factoriza con sympy el polinomio mínimo de cada cuerpo soportado"""
    from numfield import SUPPORTED_CYCLOTOMIC, cyclotomic, quadratic, check_irreducible
    fields = [cyclotomic(n) for n in SUPPORTED_CYCLOTOMIC if n > 2] + [quadratic(5)]
    ok = True
    for field in fields:
        irreducible = check_irreducible(field)
        print(f"   {'OK' if irreducible else 'FALLA'} {field.label}")
        ok = ok and irreducible
    return ok


def _load(args, config):
    from scenarios import load_scenario, resolve_scenario_path
    return load_scenario(resolve_scenario_path(args.scenario, config.catalog_dir))


def _print_json(data):
    print(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False))


# ============================================================================
# SUBCOMANDOS
# ============================================================================

def cmd_verify_scenario(args, config):
    from scenarios import run_scenario, run_catalog
    if args.scenario == 'all':
        reports = run_catalog(config, primes=args.primes)
    else:
        reports = [run_scenario(_load(args, config), config, args.primes)]
    for report in reports:
        print(f"{'OK   ' if report['ok'] else 'FALLA'} {report['name']:<14} {report['expected_config']}")
        if args.verbose or not report['ok']:
            _print_json(report['steps'])
    return EXIT_OK if all(r['ok'] for r in reports) else EXIT_FAILED


def cmd_classify(args, config):
    from singularities import classify_ade, singular_configuration
    scenario = _load(args, config)
    if args.point is not None:
        if not 0 <= args.point < len(scenario.points):
            print(f"Índice de punto fuera de rango: {args.point}")
            return EXIT_ERROR
        report = classify_ade(scenario.cubic, scenario.points[args.point], config.truncation)
        _print_json(report.to_json())
        return EXIT_OK
    reports, found = singular_configuration(scenario.cubic, scenario.points, config.truncation)
    for report in reports:
        print(f"   {report.point}: {report.type} (corango {report.corank})")
    print(f"Configuración: {found} (esperada {scenario.expected_config})")
    return EXIT_OK if found == scenario.expected_config else EXIT_FAILED


def cmd_cohomology(args, config):
    from scenarios import run_subgroup_test, check_singularities
    scenario = _load(args, config)
    tests = [t for t in scenario.subgroup_tests if args.test in (None, t.name)]
    if not tests:
        print("El escenario no tiene pruebas de subgrupos con ese nombre")
        return EXIT_ERROR
    point_types = check_singularities(scenario, config.truncation).get('point_types')
    ok = True
    for test in tests:
        result = run_subgroup_test(scenario, test, config.cap, config.bar_limit, point_types)
        print(f"{'OK   ' if result['ok'] else 'FALLA'} {test.name}: H^1 = {result['h1_str']} "
              f"(rango {result['rank']}, pic_agrees = {result['pic_agrees']})")
        ok = ok and result['ok']
    return EXIT_OK if ok else EXIT_FAILED


def cmd_defect(args, config):
    from scenarios import run_projection_claim
    scenario = _load(args, config)
    if not scenario.projection_claims:
        print("El escenario no declara componentes de proyección")
        return EXIT_ERROR
    primes = args.primes or scenario.scan_primes or config.primes
    ok = True
    for entry in scenario.projection_claims:
        result = run_projection_claim(scenario, entry, primes, config.truncation)
        print(f"{'OK   ' if result['ok'] else 'FALLA'} punto {entry.point + 1} ({result['q_type']}): "
              f"{result['components']} componentes, defecto {result['defect']}, "
              f"{result['verification']['verdict']}")
        ok = ok and result['ok']
    return EXIT_OK if ok else EXIT_FAILED


def cmd_scan_modp(args, config):
    from singularities import compare_scan
    scenario = _load(args, config)
    result = compare_scan(scenario.cubic, scenario.points, args.prime)
    print(f"F_{args.prime}: {len(result['found'])} puntos singulares, "
          f"{len(result['declared'])} declarados")
    for point in result['found']:
        print(f"   {point}")
    return EXIT_OK if result['match'] else EXIT_FAILED


def cmd_degeneration_graph(args, config):
    from degeneration import figure_configs, hasse_diagram, export_dot, export_json, compare_with_figure
    configs = figure_configs()
    edges = hasse_diagram(configs)
    if args.format == 'dot':
        sys.stdout.write(export_dot(configs, edges))
    elif args.format == 'json':
        sys.stdout.write(export_json(configs, edges) + '\n')
    else:
        for low, up in edges:
            print(f"{low} -> {up}")
    if args.compare:
        comparison = compare_with_figure(configs)
        for finding in comparison['findings']:
            print(f"# {finding['kind']}: {' - '.join(finding['edge'])}: {finding['justification']}",
                  file=sys.stderr)
    return EXIT_OK


def cmd_report(args, config):
    from scenarios import run_catalog, emit_report
    reports = run_catalog(config, primes=args.primes)
    path = emit_report(reports, args.format, args.output)
    print(f"Reporte escrito en {path}")
    return EXIT_OK if all(r['ok'] for r in reports) else EXIT_FAILED


# ============================================================================
# PARSER
# ============================================================================

def _primes(text):
    try:
        return [int(p) for p in text.split(',') if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Lista de primos inválida: {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(prog='cubic_cli', description='Toolkit de cúbicas singulares en P^4')
    parser.add_argument('--field-check', action='store_true',
                        help='verifica la irreducibilidad de los polinomios mínimos')
    parser.add_argument('--primes', type=_primes, default=None, help='primos separados por comas')
    parser.add_argument('--truncation', type=int, default=None, help='grado de truncación del lema de separación')
    parser.add_argument('--cap', type=int, default=None, help='cota de elementos de la clausura')
    parser.add_argument('--log-level', default=None, help='nivel de logging')
    parser.add_argument('--quiet', action='store_true', help='sin banner')
    sub = parser.add_subparsers(dest='command')

    p = sub.add_parser('verify-scenario', help='ejecuta todas las verificaciones de un escenario')
    p.add_argument('scenario', help="ruta, nombre del catálogo o 'all'")
    p.add_argument('-v', '--verbose', action='store_true')
    p.set_defaults(func=cmd_verify_scenario)

    p = sub.add_parser('classify', help='clasifica los puntos singulares declarados')
    p.add_argument('scenario')
    p.add_argument('--point', type=int, default=None, help='índice (desde 0) del punto')
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser('cohomology', help='H^1 y H^2 de las pruebas de subgrupos')
    p.add_argument('scenario')
    p.add_argument('--test', default=None)
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser('defect', help='verifica la descomposición de C_q y calcula el defecto')
    p.add_argument('scenario')
    p.set_defaults(func=cmd_defect)

    p = sub.add_parser('scan-modp', help='barrido de puntos singulares en F_p')
    p.add_argument('scenario')
    p.add_argument('--prime', type=int, required=True)
    p.set_defaults(func=cmd_scan_modp)

    p = sub.add_parser('degeneration-graph', help='diagrama de Hasse de las degeneraciones')
    p.add_argument('--format', choices=['dot', 'json', 'text'], default='text')
    p.add_argument('--compare', action='store_true', help='contrasta con la figura transcrita')
    p.set_defaults(func=cmd_degeneration_graph)

    p = sub.add_parser('report', help='ejecuta el catálogo y escribe el reporte')
    p.add_argument('--format', choices=['markdown', 'json'], default='markdown')
    p.add_argument('--output', default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not check_dependencies():
        return EXIT_ERROR

    # toolkit_config necesita python-dotenv
    from toolkit_config import get_config, setup_logging
    config = get_config().with_overrides(args.primes, args.truncation, args.cap)
    setup_logging(args.log_level or config.log_level)
    if not args.quiet:
        print_banner(config)

    if args.field_check and not field_check():
        return EXIT_FAILED
    if args.command is None:
        if args.field_check:
            return EXIT_OK
        parser.print_help()
        return EXIT_ERROR

    try:
        return args.func(args, config)
    except ToolkitError as e:
        print(f"Error ({e.error_type}): {e.message}")
        return EXIT_ERROR
    except FileNotFoundError as e:
        print(f"Error: {e}")
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
