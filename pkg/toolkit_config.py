"""
Configuración del toolkit de cúbicas
Las variables se leen del entorno (y de un archivo .env si existe)
"""

import os
import logging
from dataclasses import dataclass, replace

from dotenv import load_dotenv

# Cargar .env del directorio de trabajo, sin pisar variables ya exportadas
load_dotenv(override=False)

logger = logging.getLogger(__name__)

BASE_DIR = os.path.dirname(os.path.abspath(__file__))


@dataclass(frozen=True)
class ToolkitConfig:
    """Parámetros globales de una ejecución"""

    primes: tuple = (7, 13)
    truncation: int = 8
    cap: int = 2000
    bar_limit: int = 24
    catalog_dir: str = os.path.join(BASE_DIR, 'catalog')
    report_dir: str = 'reportes'
    log_level: str = 'INFO'

    def with_overrides(self, primes=None, truncation=None, cap=None):
        """Devuelve una copia con los valores pasados por línea de comandos"""
        changes = {}
        if primes:
            changes['primes'] = tuple(primes)
        if truncation:
            changes['truncation'] = truncation
        if cap:
            changes['cap'] = cap
        return replace(self, **changes) if changes else self


def _parse_primes(raw):
    primes = []
    for chunk in raw.split(','):
        chunk = chunk.strip()
        if chunk:
            primes.append(int(chunk))
    return tuple(primes)


def load_config():
    """Construye la configuración a partir de las variables de entorno"""
    catalog_dir = os.environ.get('CUBIC_CATALOG_DIR', 'catalog')
    if not os.path.isabs(catalog_dir):
        catalog_dir = os.path.join(BASE_DIR, catalog_dir)

    config = ToolkitConfig(
        primes=_parse_primes(os.environ.get('CUBIC_PRIMES', '7,13')),
        truncation=int(os.environ.get('CUBIC_TRUNCATION', '8')),
        cap=int(os.environ.get('CUBIC_CAP', '2000')),
        bar_limit=int(os.environ.get('CUBIC_BAR_LIMIT', '24')),
        catalog_dir=catalog_dir,
        report_dir=os.environ.get('CUBIC_REPORT_DIR', 'reportes'),
        log_level=os.environ.get('CUBIC_LOG_LEVEL', 'INFO').upper(),
    )
    return config


def setup_logging(level=None):
    """Configura logging una sola vez para los scripts de línea de comandos"""
    level_name = (level or get_config().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )


# Instancia global de configuración
_config = None


def get_config():
    """Obtiene la configuración global (se construye en el primer uso)"""
    global _config
    if _config is None:
        _config = load_config()
        logger.debug(f"Configuración cargada: {_config}")
    return _config
