#!/usr/bin/env python3
"""
Pruebas de la línea de comandos
"""

import sys
import json

import pytest

from cubic_cli import main, build_parser, check_dependencies, EXIT_OK, EXIT_FAILED, EXIT_ERROR


def test_classify(capsys):
    assert main(['--quiet', 'classify', '3d4']) == EXIT_OK
    out = capsys.readouterr().out
    assert 'Configuración: 3D4' in out


def test_classify_single_point(capsys):
    assert main(['--quiet', 'classify', '2a5_b0', '--point', '1']) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data['type'] == 'A5'
    assert main(['--quiet', 'classify', '2a5_b0', '--point', '7']) == EXIT_ERROR


def test_degeneration_graph_json(capsys):
    assert main(['--quiet', 'degeneration-graph', '--format', 'json']) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert len(data['nodes']) == 28
    assert ['2A1', '3A1'] in data['edges']


def test_scan_and_defect(capsys):
    assert main(['--quiet', 'scan-modp', '3d4', '--prime', '7']) == EXIT_OK
    assert main(['--quiet', 'defect', '2a2']) == EXIT_OK
    out = capsys.readouterr().out
    assert 'defecto 0' in out


def test_verify_and_cohomology(capsys):
    assert main(['--quiet', 'verify-scenario', '2a2']) == EXIT_OK
    assert main(['--quiet', 'cohomology', '3d4', '--test', 's123']) == EXIT_OK
    assert 'H^1 = Z/3' in capsys.readouterr().out
    assert main(['--quiet', 'cohomology', '3d4', '--test', 'nada']) == EXIT_ERROR


def test_input_errors(capsys):
    assert main(['--quiet', 'classify', 'no_existe']) == EXIT_ERROR
    assert main(['--quiet', 'scan-modp', '3d4', '--prime', '5']) == EXIT_ERROR
    assert main(['--quiet']) == EXIT_ERROR


def test_field_check(capsys):
    assert main(['--quiet', '--field-check']) == EXIT_OK
    assert 'FALLA' not in capsys.readouterr().out


def test_bad_primes_argument():
    with pytest.raises(SystemExit):
        build_parser().parse_args(['--primes', '7,x', 'report'])


def test_missing_dotenv_is_reported(monkeypatch, capsys):
    monkeypatch.setitem(sys.modules, 'dotenv', None)
    assert not check_dependencies()
    assert main(['--quiet', 'classify', '3d4']) == EXIT_ERROR
    out = capsys.readouterr().out
    assert 'dotenv' in out and 'sympy' not in out
