"""
Combinatoria de diagramas de Dynkin ADE y orden de degeneración.

Una configuración T degenera a T' si el diagrama de Dynkin de T es un
subgrafo inducido del de T'. Aquí se decide esa relación, se calcula el
diagrama de Hasse y se compara con la figura transcrita.
"""

import re
import json
import logging
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import networkx as nx
from networkx.algorithms import isomorphism

logger = logging.getLogger(__name__)

FAMILY_RANGES = {'A': (1, None), 'D': (4, None), 'E': (6, 8)}
FAMILY_ORDER = {'E': 0, 'D': 1, 'A': 2}


@dataclass(frozen=True)
class ADEType:
    """Tipo de singularidad: familia A, D o E con su índice"""

    family: str
    index: int

    def __post_init__(self):
        if self.family not in FAMILY_RANGES:
            raise ValueError(f"Familia desconocida: {self.family!r}")
        low, high = FAMILY_RANGES[self.family]
        if self.index < low or (high is not None and self.index > high):
            raise ValueError(f"Índice fuera de rango para {self.family}: {self.index}")

    @classmethod
    def parse(cls, text):
        match = re.fullmatch(r'\s*([ADE])_?(\d+)\s*', text)
        if not match:
            raise ValueError(f"Tipo ADE ilegible: {text!r}")
        return cls(match.group(1), int(match.group(2)))

    @property
    def milnor(self):
        return self.index

    def sort_key(self):
        return (FAMILY_ORDER[self.family], -self.index)

    def __str__(self):
        return f"{self.family}{self.index}"


@dataclass(frozen=True)
class SingConfig:
    """Multiconjunto de tipos ADE, guardado en orden canónico"""

    types: tuple

    def __post_init__(self):
        if not self.types:
            raise ValueError("Una configuración necesita al menos un tipo")
        object.__setattr__(self, 'types', tuple(sorted(self.types, key=ADEType.sort_key)))

    @classmethod
    def of(cls, types):
        return cls(tuple(types))

    @property
    def counts(self):
        return Counter(self.types)

    @property
    def total_milnor(self):
        return sum(t.milnor for t in self.types)

    def __str__(self):
        return format_config(self)


def parse_config(text):
    """Lee literales como '2D4+3A1' o 'A2'"""
    types = []
    for chunk in text.replace(' ', '').split('+'):
        match = re.fullmatch(r'(\d*)([ADE])_?(\d+)', chunk)
        if not match:
            raise ValueError(f"Configuración ilegible: {text!r}")
        multiplicity = int(match.group(1) or 1)
        types.extend([ADEType(match.group(2), int(match.group(3)))] * multiplicity)
    return SingConfig.of(types)


def format_config(config):
    counts = config.counts
    parts = []
    for t in sorted(counts, key=ADEType.sort_key):
        k = counts[t]
        parts.append(f"{k if k > 1 else ''}{t}")
    return '+'.join(parts)


def total_milnor(config):
    return config.total_milnor


# ============================================================================
# DIAGRAMAS DE DYNKIN
# ============================================================================

@lru_cache(maxsize=None)
def component_graph(ade):
    """Diagrama conexo de un tipo: camino para A, ramificado para D y E"""
    if ade.family == 'A':
        return nx.path_graph(ade.index)
    graph = nx.path_graph(ade.index - 1)
    branch = 1 if ade.family == 'D' else 2
    graph.add_edge(branch, ade.index - 1)
    return graph


def dynkin_graph(config):
    """Unión disjunta de los diagramas de cada tipo, con vértices 0..n-1"""
    return nx.disjoint_union_all([component_graph(t) for t in config.types])


def _union_graph(types):
    return nx.disjoint_union_all([component_graph(t) for t in types])


@lru_cache(maxsize=None)
def _embeds(host_type, pattern_types):
    """¿La unión disjunta de pattern_types es subgrafo inducido del diagrama host_type?"""
    host = component_graph(host_type)
    pattern = _union_graph(pattern_types)
    if pattern.number_of_nodes() > host.number_of_nodes():
        return False
    # poda por sucesión de grados
    host_degrees = sorted((d for _, d in host.degree()), reverse=True)
    pattern_degrees = sorted((d for _, d in pattern.degree()), reverse=True)
    if any(p > h for p, h in zip(pattern_degrees, host_degrees)):
        return False
    matcher = isomorphism.GraphMatcher(host, pattern)
    return matcher.subgraph_is_isomorphic()


def _sub_multisets(remaining):
    """Todos los sub-multiconjuntos (como tuplas ordenadas) de un Counter"""
    keys = sorted(remaining, key=ADEType.sort_key)
    for choice in product(*[range(remaining[k] + 1) for k in keys]):
        chosen = []
        for k, m in zip(keys, choice):
            chosen.extend([k] * m)
        yield tuple(chosen)


def find_embedding(pattern, host):
    """
    Busca una asignación de las componentes de 'pattern' a las componentes
    de 'host' tal que cada grupo asignado sea subgrafo inducido de su
    componente. Devuelve la lista [(tipo host, tupla de tipos)] o None.
    """
    host_types = host.types

    @lru_cache(maxsize=None)
    def search(position, remaining):
        if not remaining:
            return ()
        if position == len(host_types):
            return None
        counts = Counter(dict(remaining))
        # las componentes grandes primero, para podar antes
        for chosen in sorted(_sub_multisets(counts), key=len, reverse=True):
            if chosen and not _embeds(host_types[position], chosen):
                continue
            rest = counts - Counter(chosen)
            tail = search(position + 1, tuple(sorted(rest.items(), key=lambda kv: kv[0].sort_key())))
            if tail is not None:
                head = ((host_types[position], chosen),) if chosen else ()
                return head + tail
        return None

    start = tuple(sorted(pattern.counts.items(), key=lambda kv: kv[0].sort_key()))
    result = search(0, start)
    return list(result) if result is not None else None


def degenerates_to(lower, upper):
    """T ≼ T': el diagrama de T es subgrafo inducido del de T'"""
    if lower.total_milnor > upper.total_milnor:
        return False
    return find_embedding(lower, upper) is not None


def relation_matrix(configs):
    return {(a, b): a == b or degenerates_to(a, b) for a in configs for b in configs}


def hasse_diagram(configs):
    """Relaciones de cobertura (inferior, superior) del orden restringido a configs"""
    if len(set(configs)) != len(configs):
        raise ValueError("Las configuraciones deben ser distintas")
    relation = relation_matrix(configs)
    edges = []
    for a in configs:
        for b in configs:
            if a == b or not relation[(a, b)]:
                continue
            between = any(c != a and c != b and relation[(a, c)] and relation[(c, b)]
                          for c in configs)
            if not between:
                edges.append((a, b))
    edges.sort(key=lambda e: (e[0].total_milnor, str(e[0]), e[1].total_milnor, str(e[1])))
    logger.debug(f"Diagrama de Hasse con {len(configs)} nodos y {len(edges)} aristas")
    return edges


def poset_digraph(configs):
    """Grafo dirigido del orden estricto; sirve para contrastar con transitive_reduction"""
    graph = nx.DiGraph()
    graph.add_nodes_from(configs)
    for (a, b), related in relation_matrix(configs).items():
        if related and a != b:
            graph.add_edge(a, b)
    return graph


# ============================================================================
# FIGURA DE DEGENERACIONES
# ============================================================================

# (etiqueta del nodo, configuración, nivel de la columna izquierda)
FIGURE_NODES = [
    (1, '2A1', 2), (2, '3A1', 3), (3, '2A2', 4), (4, '4A1', 4), (5, '5A1', 5),
    (6, '2A3', 6), (7, '2A2+2A1', 6), (8, '3A2', 6), (9, '6A1', 6),
    (10, '2A2+3A1', 7), (11, '7A1', 7),
    (12, '2D4', 8), (13, '3A2+2A1', 8), (14, '2A4', 8), (15, '2A3+2A1', 8),
    (16, '2A2+4A1', 8), (17, '8A1', 8), (18, '4A2', 8),
    (19, '3A3', 9), (20, '2A3+3A1', 9), (21, '9A1', 9),
    (22, '2D4+2A1', 10), (23, '2A5', 10), (24, '2A3+4A1', 10), (25, '5A2', 10),
    (26, '10A1', 10), (27, '2D4+3A1', 11), (28, '3D4', 12),
]

# Aristas de la figura como (superior, inferior)
FIGURE_EDGES = [
    (2, 1), (3, 1), (4, 2), (5, 4), (6, 3), (6, 4), (7, 3), (7, 4), (8, 2), (8, 3),
    (9, 5), (10, 5), (10, 7), (11, 9), (12, 6), (12, 9), (13, 8), (13, 10), (14, 6),
    (15, 6), (15, 7), (15, 9), (16, 9), (16, 10), (17, 11), (18, 7), (18, 8), (19, 8),
    (19, 15), (20, 10), (20, 11), (20, 15), (21, 17), (22, 12), (22, 15), (22, 17),
    (23, 9), (23, 10), (23, 14), (23, 18), (24, 16), (24, 17), (24, 20), (25, 13),
    (25, 18), (26, 21), (27, 20), (27, 21), (27, 22), (28, 19), (28, 27),
]


def figure_configs():
    return [parse_config(text) for _, text, _ in FIGURE_NODES]


def figure_edge_set():
    by_label = {label: parse_config(text) for label, text, _ in FIGURE_NODES}
    return {(by_label[low], by_label[up]) for up, low in FIGURE_EDGES}


def _describe_embedding(embedding):
    return '; '.join(
        f"{'+'.join(str(t) for t in group)} ⊂ {host}" for host, group in embedding)


def compare_with_figure(configs=None, figure_edges=None):
    """
    Diferencia simétrica entre el diagrama de Hasse calculado y la figura.
    Cada discrepancia lleva su justificación:
      - 'not_a_cover': la relación vale pero hay una configuración intermedia
      - 'no_relation': no existe inclusión inducida
      - 'missing_cover': cobertura calculada ausente en la figura, con testigo
    """
    configs = configs or figure_configs()
    figure_edges = figure_edges if figure_edges is not None else figure_edge_set()
    computed = set(hasse_diagram(configs))
    relation = relation_matrix(configs)
    findings = []

    for low, up in sorted(figure_edges - computed, key=lambda e: (str(e[1]), str(e[0]))):
        if relation[(low, up)]:
            middle = next(c for c in configs
                          if c not in (low, up) and relation[(low, c)] and relation[(c, up)])
            findings.append({
                'edge': [str(low), str(up)],
                'kind': 'not_a_cover',
                'justification': f"{low} ≺ {middle} ≺ {up}",
            })
        else:
            reason = ("número de Milnor mayor" if low.total_milnor > up.total_milnor
                      else "ninguna asignación de componentes es inclusión inducida")
            findings.append({
                'edge': [str(low), str(up)],
                'kind': 'no_relation',
                'justification': reason,
            })

    for low, up in sorted(computed - figure_edges, key=lambda e: (str(e[1]), str(e[0]))):
        findings.append({
            'edge': [str(low), str(up)],
            'kind': 'missing_cover',
            'justification': _describe_embedding(find_embedding(low, up)),
        })

    if findings:
        logger.info(f"La figura difiere del diagrama calculado en {len(findings)} aristas")
    return {
        'computed_edges': len(computed),
        'figure_edges': len(figure_edges),
        'matches': not findings,
        'findings': findings,
    }


def export_dot(configs, edges):
    lines = ['graph degeneraciones {', '  rankdir=BT;']
    for c in configs:
        lines.append(f'  "{c}" [label="{c}\\n{c.total_milnor}"];')
    for low, up in edges:
        lines.append(f'  "{low}" -- "{up}";')
    lines.append('}')
    return '\n'.join(lines) + '\n'


def export_json(configs, edges):
    data = {
        'nodes': [{'config': str(c), 'milnor': c.total_milnor} for c in configs],
        'edges': [[str(low), str(up)] for low, up in edges],
    }
    return json.dumps(data, indent=2, ensure_ascii=False, sort_keys=True)
