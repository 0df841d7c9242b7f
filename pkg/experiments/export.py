# experiments/export.py - PERSISTÊNCIA DE RESULTADOS (CSV E JSON)

import csv
import json
import logging
from pathlib import Path

import numpy as np

from .exceptions import ExportError
from .harness import SUMMARY_COLUMNS, TRIAL_COLUMNS, McSummary, TrialResult

logger = logging.getLogger('experiments.export')

EXPORT_FORMATS = ('csv', 'json')

# Ordem estável das colunas nos arquivos CSV
TRIAL_HEADER = ('t',) + TRIAL_COLUMNS
SUMMARY_HEADER = ('t',) + SUMMARY_COLUMNS

TRIAL_META = (
    'kind', 'controller', 'seed', 'trial_index', 'J_star', 'aborted', 'abort_step',
    'abort_reason', 'skipped_updates', 'epochs', 'max_error_model_residual',
)
SUMMARY_META = ('kind', 'controller', 'n_trials', 'aborted_trials', 'config_digest', 'J_star')


def _number(value) -> str:
    """repr do float preserva todos os bits"""
    return repr(float(value))


def _metadata(obj, kind: str, keys) -> dict:
    return {key: (kind if key == 'kind' else getattr(obj, key)) for key in keys}


def _write_text(path: Path, writer_fn):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', encoding='utf-8', newline='') as handle:
            writer_fn(handle)
    except OSError as e:
        raise ExportError(f"Falha ao gravar {path}: {e}") from e
    logger.debug(f"Arquivo gravado: {path}")


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding='utf-8')
    except OSError as e:
        raise ExportError(f"Falha ao ler {path}: {e}") from e


def _write_csv(path: Path, meta: dict, header, columns):
    def write(handle):
        for key, value in meta.items():
            handle.write(f"# {key}={json.dumps(value)}\n")
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for t, row in enumerate(zip(*columns)):
            writer.writerow([t] + [_number(value) for value in row])

    _write_text(path, write)


def _parse_csv(text: str, path: Path, header):
    meta = {}
    lines = text.splitlines()
    start = 0
    for start, line in enumerate(lines):
        if not line.startswith('# '):
            break
        key, _, value = line[2:].partition('=')
        meta[key] = json.loads(value)
    else:
        start = len(lines)

    rows = list(csv.reader(lines[start:]))
    if not rows or tuple(rows[0]) != tuple(header):
        raise ExportError(f"Cabeçalho inesperado em {path}: esperado {','.join(header)}")
    data = np.array([[float(value) for value in row[1:]] for row in rows[1:]], dtype=float)
    if data.size == 0:
        data = np.zeros((0, len(header) - 1))
    return meta, data


# ===== TRIAL RESULT =====

def export_trial(result: TrialResult, path, fmt: str = 'csv') -> Path:
    """Grava um ensaio; colunas t,cost,regret,state_norm,ec_norm,theta_err"""
    path = Path(path)
    meta = _metadata(result, 'trial', TRIAL_META)
    if fmt == 'csv':
        _write_csv(path, meta, TRIAL_HEADER, [getattr(result, name) for name in TRIAL_COLUMNS])
    elif fmt == 'json':
        payload = dict(meta, **{name: getattr(result, name).tolist() for name in TRIAL_COLUMNS})
        _write_text(path, lambda handle: json.dump(payload, handle, sort_keys=True))
    else:
        raise ValueError(f"Formato desconhecido: {fmt}. Válidos: {EXPORT_FORMATS}")
    return path


def _trial_from(meta: dict, columns: dict) -> TrialResult:
    return TrialResult(
        controller=meta['controller'],
        seed=meta['seed'],
        trial_index=meta['trial_index'],
        J_star=meta['J_star'],
        aborted=meta['aborted'],
        abort_step=meta['abort_step'],
        abort_reason=meta['abort_reason'],
        skipped_updates=meta['skipped_updates'],
        epochs=meta['epochs'],
        max_error_model_residual=meta['max_error_model_residual'],
        **{name: np.asarray(columns[name], dtype=float) for name in TRIAL_COLUMNS},
    )


def _summary_from(meta: dict, columns: dict) -> McSummary:
    return McSummary(
        controller=meta['controller'],
        n_trials=meta['n_trials'],
        aborted_trials=meta['aborted_trials'],
        config_digest=meta['config_digest'],
        J_star=meta['J_star'],
        **{name: np.asarray(columns[name], dtype=float) for name in SUMMARY_COLUMNS},
    )


# ===== MC SUMMARY =====

def export_summary(summary: McSummary, path, fmt: str = 'csv') -> Path:
    """Grava um resumo; sem ensaios o CSV contém só o cabeçalho"""
    path = Path(path)
    meta = _metadata(summary, 'summary', SUMMARY_META)
    if fmt == 'csv':
        _write_csv(path, meta, SUMMARY_HEADER, [getattr(summary, name) for name in SUMMARY_COLUMNS])
    elif fmt == 'json':
        payload = dict(meta, **{name: getattr(summary, name).tolist() for name in SUMMARY_COLUMNS})
        payload['median_final_regret'] = summary.median_final_regret
        _write_text(path, lambda handle: json.dump(payload, handle, sort_keys=True))
    else:
        raise ValueError(f"Formato desconhecido: {fmt}. Válidos: {EXPORT_FORMATS}")
    return path


def export_results(obj, path, fmt: str = 'csv') -> Path:
    """
    Grava TrialResult ou McSummary em CSV ou JSON

    Raises:
        ExportError: falha de escrita
    """
    if isinstance(obj, TrialResult):
        return export_trial(obj, path, fmt)
    if isinstance(obj, McSummary):
        return export_summary(obj, path, fmt)
    raise TypeError(f"Tipo não exportável: {type(obj).__name__}")


def import_results(path):
    """
    Lê um arquivo gravado por export_results (formato pela extensão)

    Raises:
        ExportError: arquivo ilegível ou em formato inesperado
    """
    path = Path(path)
    text = _read_text(path)
    if path.suffix == '.json':
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as e:
            raise ExportError(f"JSON inválido em {path}: {e}") from e
        kind = payload.get('kind')
        if kind == 'trial':
            return _trial_from(payload, payload)
        if kind == 'summary':
            return _summary_from(payload, payload)
        raise ExportError(f"Tipo de resultado desconhecido em {path}: {kind!r}")

    first = text.split('\n', 1)[0]
    if first == '# kind="trial"':
        meta, data = _parse_csv(text, path, TRIAL_HEADER)
        return _trial_from(meta, {name: data[:, i] for i, name in enumerate(TRIAL_COLUMNS)})
    if first == '# kind="summary"':
        meta, data = _parse_csv(text, path, SUMMARY_HEADER)
        return _summary_from(meta, {name: data[:, i] for i, name in enumerate(SUMMARY_COLUMNS)})
    raise ExportError(f"Arquivo sem metadados de resultado: {path}")


# ===== TRAJETÓRIAS φ_t =====

def write_trajectory(phi, path, metadata: dict = None) -> Path:
    """Colunas t,phi_0..phi_{d-1}; metadata vai em linhas '# chave=valor'"""
    path = Path(path)
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    header = ('t',) + tuple(f"phi_{i}" for i in range(phi.shape[1]))
    meta = dict(metadata or {})
    meta.setdefault('kind', 'trajectory')
    _write_csv(path, meta, header, list(phi.T))
    return path


def read_trajectory(path):
    """
    Devolve (φ como matriz T × d, metadados)

    Raises:
        ExportError: arquivo ausente ou sem colunas phi_i
    """
    path = Path(path)
    text = _read_text(path)
    header_line = next((line for line in text.splitlines() if not line.startswith('# ')), '')
    names = header_line.split(',')
    if len(names) < 2 or names[0] != 't' or any(name != f"phi_{i}" for i, name in enumerate(names[1:])):
        raise ExportError(f"Trajetória sem colunas t,phi_0..: {path}")
    meta, data = _parse_csv(text, path, tuple(names))
    return data, meta
