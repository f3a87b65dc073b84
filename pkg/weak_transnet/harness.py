"""
Запуск експериментів: читання INI-конфігурацій, розгортання сіток параметрів,
виконання завдань по зернах, звіти JSON-lines та експорт полів
"""

import configparser
import csv
import dataclasses
import itertools
import logging
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from weak_transnet import problems
from weak_transnet.evaluation import (DEFAULT_GAMMA_GRID, DEFAULT_SIGMA_F, ErrorReport, GridSpec, append_report,
                                      evaluate_on_grid, export_csv, field_on_grid, pointwise_error, relative_l2,
                                      shape_sweep)
from weak_transnet.problems import CatalogEntry, ReferenceGrid, load_reference_grid
from weak_transnet.quadrature import QuadratureConfig
from weak_transnet.solvers import (METHODS, SampleConfig, Solution, TestConfig, solve_drm, solve_fdrm, solve_fwtn,
                                   solve_pou_sf, solve_pou_wtn, solve_sf, solve_wtn)
from weak_transnet.trial_basis import BasisConfig, FourierConfig, mixed_gammas
from weak_transnet.utils import ConfigError, WeakTransNetError, ensure_directory

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS = Path(__file__).resolve().parent.parent / 'config.ini'
EXPERIMENT_PREFIX = 'experiment:'
POU_METHODS = ('POU_WTN', 'POU_SF')
RITZ_METHODS = ('DRM', 'FDRM')

# Ключі, значення яких через кому розгортаються у декартів добуток
SWEEPABLE = ('method', 'M', 'N', 'gamma', 'sigma', 'n_l', 'beta', 'lambda', 'beta_sf', 'beta_drm',
             'epsilon', 'layout', 'points_per_axis', 'mc_samples', 'quadrature')
INT_KEYS = ('M', 'N', 'n_l', 'points_per_axis', 'mc_samples', 'boundary_points_per_edge', 'boundary_per_edge',
            'interior_samples', 'interface_samples', 'fourier_p', 'grid_n')
FLOAT_KEYS = ('sigma', 'beta', 'lambda', 'beta_sf', 'beta_drm', 'epsilon', 'fourier_margin', 'rcond')
KNOWN_KEYS = set(SWEEPABLE + INT_KEYS + FLOAT_KEYS + ('problem', 'boundary_mode', 'seeds', 'reference', 'fields',
                                                      'fourier_sigmas'))

# Секції config.ini, з яких беруться значення за замовчуванням
SETTINGS_SECTIONS = ('Quadrature', 'Solver', 'Sampling')


@dataclass(frozen=True)
class ExperimentConfig:
    """Одна конфігурація експерименту після розгортання сітки параметрів"""

    name: str
    problem: str
    method: str
    M: Optional[int] = None
    N: int = 300
    gamma: Optional[str] = None
    sigma: float = 0.05
    n_l: int = 10
    beta: float = 1.0
    lam: float = 1.0
    beta_sf: float = 1.0
    beta_drm: float = 1.0
    epsilon: float = 1e-5
    layout: Optional[str] = None
    quadrature: str = 'simpson'
    points_per_axis: int = 33
    mc_samples: int = 1089
    boundary_points_per_edge: int = 33
    boundary_per_edge: int = 200
    boundary_mode: str = 'uniform_grid'
    interior_samples: int = 1000
    interface_samples: int = 200
    fourier_p: int = 64
    fourier_sigmas: Tuple[float, ...] = (1.0, 3.0)
    fourier_margin: float = 1.0
    seeds: Tuple[int, ...] = (0, 1, 2, 3, 4)
    reference: Optional[str] = None
    fields: bool = False
    rcond: float = 1e-10
    grid_n: int = 129

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        data = dict(data)
        data['fourier_sigmas'] = tuple(data.get('fourier_sigmas', (1.0, 3.0)))
        data['seeds'] = tuple(data.get('seeds', (0,)))
        return cls(**data)


def load_settings(path=None) -> Dict[str, str]:
    """Значення за замовчуванням з config.ini (плоский словник ключ -> рядок)"""
    path = Path(path) if path is not None else DEFAULT_SETTINGS
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    settings: Dict[str, str] = {}
    if not path.exists():
        logger.warning(f"Файл налаштувань {path} не знайдено, використовуються вбудовані значення")
        return settings
    parser.read(path, encoding='utf-8')
    for section in SETTINGS_SECTIONS:
        if parser.has_section(section):
            settings.update(dict(parser[section]))
    return settings


def load_run_settings(path=None) -> Dict[str, str]:
    """Секції [Run] та [Report] з config.ini"""
    path = Path(path) if path is not None else DEFAULT_SETTINGS
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    result = {'seeds': '0,1,2,3,4', 'jobs': '1', 'out_dir': 'results', 'report_name': 'report.jsonl',
              'docx': 'false', 'docx_name': 'report.docx', 'table_style': 'Table Grid'}
    if path.exists():
        parser.read(path, encoding='utf-8')
        for section in ('Run', 'Report'):
            if parser.has_section(section):
                result.update(dict(parser[section]))
    return result


def _line_index(text: str) -> Dict[Tuple[str, str], int]:
    """Номери рядків для пар (секція, ключ)"""
    index = {}
    section = 'DEFAULT'
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in '#;':
            continue
        header = re.match(r'^\[(.+)\]$', line)
        if header:
            section = header.group(1).strip()
            index[(section, '')] = number
            continue
        key = re.match(r'^([^=:]+?)\s*[=:]', line)
        if key:
            index[(section, key.group(1).strip())] = number
    return index


def _split(value: str) -> List[str]:
    return [item.strip() for item in value.split(',') if item.strip()]


def _sweep_values(key: str, value: str) -> List[str]:
    if key == 'gamma' and value.strip().startswith('mix'):
        return [value.strip()]
    return _split(value)


def parse_gamma(spec: str, M: int):
    """'1.0' - один γ для всіх нейронів, 'mix' або 'mix:1,5,10' - рівні групи"""
    spec = spec.strip()
    if spec.startswith('mix'):
        values = (1.0, 5.0, 10.0)
        if ':' in spec:
            values = tuple(float(v) for v in _split(spec.split(':', 1)[1]))
        return tuple(mixed_gammas(M, values))
    return float(spec)


def _typed(name: str, values: Dict[str, str], lines: Dict[str, int]) -> ExperimentConfig:
    def line(key):
        return lines.get(key)

    kwargs: Dict[str, Any] = {'name': name}
    for key, raw in values.items():
        try:
            if key in INT_KEYS:
                kwargs[key] = int(raw)
            elif key in FLOAT_KEYS:
                kwargs['lam' if key == 'lambda' else key] = float(raw)
            elif key == 'seeds':
                kwargs[key] = tuple(int(v) for v in _split(raw))
            elif key == 'fourier_sigmas':
                kwargs[key] = tuple(float(v) for v in _split(raw))
            elif key == 'fields':
                kwargs[key] = raw.strip().lower() in ('1', 'true', 'yes', 'on')
            elif key == 'gamma':
                parse_gamma(raw, 3)
                kwargs[key] = raw.strip()
            else:
                kwargs[key] = raw.strip() or None
        except ValueError:
            raise ConfigError(f"некоректне значення '{raw}' для ключа '{key}'", line=line(key))
    config = ExperimentConfig(**kwargs)
    _validate(config, lines)
    return config


def _validate(config: ExperimentConfig, lines: Dict[str, int]):
    if config.problem not in problems.PROBLEM_IDS:
        raise ConfigError(f"невідома задача '{config.problem}'", line=lines.get('problem'))
    if config.method not in METHODS:
        raise ConfigError(f"невідомий метод '{config.method}', доступні: {', '.join(METHODS)}",
                          line=lines.get('method'))
    entry = problems.get(config.problem)
    if config.method in POU_METHODS:
        if not config.layout:
            raise ConfigError(f"метод {config.method} потребує ключа layout", line=lines.get('method'))
        if config.layout not in entry.layouts:
            raise ConfigError(f"задача {config.problem} не має розбиття '{config.layout}'", line=lines.get('layout'))
    if config.method in RITZ_METHODS and entry.problem.constraint == 'hard':
        raise ConfigError(f"метод {config.method} потребує м'якого граничного обмеження", line=lines.get('method'))
    for key in ('N', 'n_l', 'boundary_per_edge', 'interior_samples', 'interface_samples', 'fourier_p', 'grid_n'):
        if getattr(config, key) <= 0:
            raise ConfigError(f"ключ '{key}' має бути додатним", line=lines.get(key))
    if config.M is not None and config.M <= 0:
        raise ConfigError("ключ 'M' має бути додатним", line=lines.get('M'))
    if config.sigma <= 0.0:
        raise ConfigError("ключ 'sigma' має бути додатним", line=lines.get('sigma'))
    if config.quadrature not in ('simpson', 'mc'):
        raise ConfigError(f"невідома квадратура '{config.quadrature}'", line=lines.get('quadrature'))
    for key in ('points_per_axis', 'boundary_points_per_edge'):
        value = getattr(config, key)
        if value < 3 or value % 2 == 0:
            raise ConfigError(f"ключ '{key}' має бути непарним і не меншим за 3", line=lines.get(key))
    if config.boundary_mode not in ('uniform_grid', 'uniform_random'):
        raise ConfigError(f"невідомий режим межі '{config.boundary_mode}'", line=lines.get('boundary_mode'))
    if not config.seeds:
        raise ConfigError("порожній список зерен", line=lines.get('seeds'))
    if config.reference and not Path(config.reference).exists():
        raise ConfigError(f"еталонну сітку не знайдено: {config.reference}", line=lines.get('reference'))


def parse_experiments(path, settings: Optional[Dict[str, str]] = None) -> List[ExperimentConfig]:
    """
    Читання файлу експериментів та розгортання сіток параметрів

    Порядок пріоритету: секція експерименту, [DEFAULT] файлу, значення задачі
    з каталогу, config.ini.

    Args:
        path: Шлях до INI-файлу
        settings: Значення з config.ini (за замовчуванням читаються)

    Returns:
        Список ExperimentConfig у порядку секцій та декартового добутку
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Файл конфігурації не знайдено: {path}")
    text = path.read_text(encoding='utf-8')
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as e:
        raise ConfigError(f"помилка синтаксису: {str(e).splitlines()[0]}", line=getattr(e, 'lineno', None))
    settings = load_settings() if settings is None else settings
    index = _line_index(text)
    sections = [s for s in parser.sections() if s.startswith(EXPERIMENT_PREFIX)]
    if not sections:
        raise ConfigError(f"Файл {path} не містить секцій [{EXPERIMENT_PREFIX}<назва>]")
    configs: List[ExperimentConfig] = []
    for section in sections:
        name = section[len(EXPERIMENT_PREFIX):].strip()
        file_values = dict(parser[section])
        lines = {key: index.get((section, key), index.get(('DEFAULT', key))) for key in file_values}
        for key in file_values:
            if key not in KNOWN_KEYS:
                raise ConfigError(f"невідомий ключ '{key}'", line=lines.get(key))
        if 'problem' not in file_values or 'method' not in file_values:
            raise ConfigError(f"експеримент '{name}' потребує ключів problem та method",
                              line=index.get((section, '')))
        problem_id = file_values['problem'].strip()
        if problem_id not in problems.PROBLEM_IDS:
            raise ConfigError(f"невідома задача '{problem_id}'", line=lines.get('problem'))
        merged = {k: v for k, v in settings.items() if k in KNOWN_KEYS}
        merged.update({k: str(v) for k, v in problems.get(problem_id).defaults.items() if k in KNOWN_KEYS})
        merged.update(file_values)
        sweep_keys = [key for key in SWEEPABLE if key in merged]
        grids = [_sweep_values(key, merged[key]) for key in sweep_keys]
        for combination in itertools.product(*grids):
            values = dict(merged)
            values.update(dict(zip(sweep_keys, combination)))
            # M та γ для розбиттів беруться з розбиття, якщо їх не задано явно
            if values['method'] in POU_METHODS:
                for key in ('M', 'gamma'):
                    if key not in file_values:
                        values.pop(key, None)
            configs.append(_typed(name, values, lines))
    logger.info(f"Файл {path}: {len(sections)} експериментів, {len(configs)} конфігурацій")
    return configs


def _basis_config(config: ExperimentConfig, entry: CatalogEntry) -> BasisConfig:
    M = config.M if config.M is not None else int(entry.defaults['M'])
    gamma = config.gamma if config.gamma is not None else str(entry.defaults.get('gamma', 1.0))
    return BasisConfig(M, parse_gamma(gamma, M))


def _layout_configs(config: ExperimentConfig, entry: CatalogEntry) -> List[BasisConfig]:
    spec = entry.layouts[config.layout]
    configs = spec.basis_configs(M=config.M)
    if config.gamma is not None:
        configs = [BasisConfig(c.M, parse_gamma(config.gamma, c.M)) for c in configs]
    return configs


def solve_experiment(config: ExperimentConfig, seed: int) -> Tuple[Solution, CatalogEntry]:
    """Виклик конвеєра розв'язувача за міткою методу"""
    entry = problems.get(config.problem)
    problem = dataclasses.replace(entry.problem, beta=config.beta)
    quad_cfg = QuadratureConfig(config.points_per_axis, config.mc_samples, config.boundary_points_per_edge,
                                config.quadrature, seed)
    test_cfg = TestConfig(config.N, (config.sigma, config.sigma), config.n_l)
    sample_cfg = SampleConfig(config.interior_samples, config.boundary_per_edge, config.boundary_mode)
    fourier_cfg = FourierConfig(config.fourier_p, config.fourier_sigmas, config.fourier_margin)
    method = config.method
    if method == 'WTN':
        solution = solve_wtn(problem, _basis_config(config, entry), test_cfg, quad_cfg, config.beta, sample_cfg,
                             seed, config.rcond)
    elif method == 'FWTN':
        solution = solve_fwtn(problem, fourier_cfg, _basis_config(config, entry), test_cfg, quad_cfg, config.beta,
                              sample_cfg, seed, config.rcond)
    elif method == 'POU_WTN':
        layout = entry.layout(config.layout)
        solution = solve_pou_wtn(problem, layout, _layout_configs(config, entry), test_cfg, quad_cfg, config.beta,
                                 config.lam, sample_cfg, seed, config.interface_samples, config.rcond)
    elif method == 'SF':
        solution = solve_sf(problem, _basis_config(config, entry), sample_cfg, config.beta_sf, seed, config.rcond)
    elif method == 'POU_SF':
        layout = entry.layout(config.layout)
        solution = solve_pou_sf(problem, layout, _layout_configs(config, entry), sample_cfg, config.beta_sf,
                                config.lam, seed, config.interface_samples, config.rcond)
    elif method == 'DRM':
        solution = solve_drm(problem, _basis_config(config, entry), sample_cfg, config.beta_drm, config.epsilon,
                             seed, config.rcond)
    else:
        solution = solve_fdrm(problem, fourier_cfg, _basis_config(config, entry), sample_cfg, config.beta_drm,
                              config.epsilon, seed, config.rcond)
    return solution, entry


def score_solution(solution: Solution, entry: CatalogEntry, grid_n: int = 129,
                   reference: Optional[ReferenceGrid] = None) -> Tuple[Optional[float], ReferenceGrid, Optional[ReferenceGrid]]:
    """
    Відносна похибка L2 на сітці

    Returns:
        (rel_l2 або None, поле розв'язку, поле еталону або None)
    """
    domain = entry.problem.domain
    if reference is not None:
        mask = domain.contains(reference.points)
        values = np.where(mask, solution.evaluate(reference.points), np.nan)
        u_hat = ReferenceGrid(reference.xs, reference.ys, values.reshape(reference.values.shape))
        ref = ReferenceGrid(reference.xs, reference.ys, np.where(mask.reshape(reference.values.shape),
                                                                 reference.values, np.nan))
        return relative_l2(u_hat.values, ref.values), u_hat, ref
    grid = GridSpec.for_domain(domain, grid_n)
    u_hat = evaluate_on_grid(solution, grid, domain)
    if entry.problem.exact is None:
        return None, u_hat, None
    ref = field_on_grid(entry.problem.exact, grid, domain)
    return relative_l2(u_hat.values, ref.values), u_hat, ref


def run_job(config: ExperimentConfig, seed: int, job_name: str, out_dir: Optional[str] = None,
            reference_path: Optional[str] = None) -> ErrorReport:
    """Одне завдання (конфігурація, зерно): розв'язання, оцінка, експорт полів"""
    started = time.perf_counter()
    solution, entry = solve_experiment(config, seed)
    path = reference_path or config.reference
    reference = load_reference_grid(path) if path else None
    if reference is None and entry.reference == 'external_grid':
        logger.warning(f"{job_name}: задача {entry.id} потребує еталонної сітки, похибку не обчислено")
    rel, u_hat, ref = score_solution(solution, entry, config.grid_n, reference)
    if config.fields and out_dir is not None:
        fields_dir = Path(out_dir) / 'fields'
        export_csv(u_hat, fields_dir / f'{job_name}_u.csv')
        if ref is not None:
            export_csv(pointwise_error(u_hat, ref), fields_dir / f'{job_name}_error.csv')
    hyper = config.to_dict()
    hyper.pop('name')
    diagnostics = {k: v for k, v in solution.diagnostics.items() if k != 'solve_time'}
    return ErrorReport(config.method, config.problem, hyper, rel, seed,
                       (time.perf_counter() - started) * 1000.0, experiment=job_name, diagnostics=diagnostics)


def _run_job_safe(args) -> Tuple[str, Optional[ErrorReport], Optional[str]]:
    config, seed, job_name, out_dir, reference_path = args
    try:
        return job_name, run_job(config, seed, job_name, out_dir, reference_path), None
    except (WeakTransNetError, ValueError, KeyError, np.linalg.LinAlgError) as e:
        return job_name, None, str(e)


def expand_jobs(configs: Sequence[ExperimentConfig], seed: Optional[int] = None) -> List[Tuple[ExperimentConfig, int, str]]:
    counters: Dict[str, int] = {}
    jobs = []
    for config in configs:
        index = counters.get(config.name, 0)
        counters[config.name] = index + 1
        seeds = (seed,) if seed is not None else config.seeds
        for s in seeds:
            jobs.append((config, int(s), f'{config.name}_{index:02d}_s{s}'))
    return jobs


def execute_jobs(jobs: Sequence[Tuple[ExperimentConfig, int, str]], out_dir: Optional[str] = None,
                 workers: int = 1, reference_path: Optional[str] = None) -> Tuple[List[ErrorReport], List[Tuple[str, str]]]:
    """Виконання завдань послідовно або у пулі процесів; порядок результатів - порядок завдань"""
    payload = [(config, seed, name, out_dir, reference_path) for config, seed, name in jobs]
    if workers > 1 and len(payload) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job_safe, payload))
    else:
        results = [_run_job_safe(item) for item in payload]
    reports, failures = [], []
    for name, report, error in results:
        if report is None:
            logger.error(f"Завдання {name} завершилось помилкою: {error}")
            failures.append((name, error))
        else:
            rel = 'н/д' if report.rel_l2 is None else f'{report.rel_l2:.3e}'
            logger.info(f"Завдання {name}: похибка {rel}")
            reports.append(report)
    return reports, failures


def summarize(reports: Sequence[ErrorReport]) -> List[Dict[str, Any]]:
    """Медіана похибки по зернах для кожної конфігурації"""
    groups: Dict[str, List[ErrorReport]] = {}
    for report in reports:
        key = report.experiment.rsplit('_s', 1)[0]
        groups.setdefault(key, []).append(report)
    rows = []
    for key, items in groups.items():
        errors = [r.rel_l2 for r in items if r.rel_l2 is not None]
        first = items[0]
        rows.append({
            'configuration': key,
            'method': first.method,
            'problem': first.problem,
            'M': first.hyperparameters.get('M'),
            'N': first.hyperparameters.get('N'),
            'seeds': len(items),
            'median_rel_l2': float(np.median(errors)) if errors else None,
        })
    return rows


def run(config_path, out_dir: Optional[str] = None, seed: Optional[int] = None, jobs: Optional[int] = None,
        ref: Optional[str] = None, settings_path=None, docx: Optional[bool] = None) -> int:
    """
    Виконання файлу експериментів

    Returns:
        0 - успіх, 1 - частина завдань завершилась помилкою, 2 - помилка конфігурації
    """
    run_settings = load_run_settings(settings_path)
    out_dir = out_dir or run_settings['out_dir']
    workers = jobs if jobs is not None else int(run_settings['jobs'])
    try:
        configs = parse_experiments(config_path, load_settings(settings_path))
        if ref is not None and not Path(ref).exists():
            raise ConfigError(f"еталонну сітку не знайдено: {ref}")
    except ConfigError as e:
        logger.error(f"Помилка конфігурації {config_path}: {e}")
        return 2
    ensure_directory(out_dir)
    job_list = expand_jobs(configs, seed)
    logger.info(f"Запуск {len(job_list)} завдань у {workers} процесах")
    reports, failures = execute_jobs(job_list, out_dir, workers, ref)
    report_path = append_report(reports, Path(out_dir) / run_settings['report_name'])
    logger.info(f"Звіт JSON-lines: {report_path}")
    use_docx = docx if docx is not None else run_settings['docx'].strip().lower() in ('1', 'true', 'yes', 'on')
    if use_docx:
        write_docx(reports, failures, Path(out_dir) / run_settings['docx_name'], run_settings['table_style'])
    return 1 if failures else 0


def write_docx(reports: Sequence[ErrorReport], failures: Sequence[Tuple[str, str]], path: Path,
               table_style: str = 'Table Grid') -> bool:
    try:
        from weak_transnet.report_generator import ReportGenerator
        generator = ReportGenerator(table_style=table_style)
    except ImportError as e:
        logger.warning(f"Звіт Word не створено: {e}")
        return False
    return generator.generate_report(summarize(reports), reports, failures, path)


def list_catalog() -> str:
    """Таблиця задач каталогу зі значеннями за замовчуванням"""
    header = f"{'задача':<18} {'еталон':<26} {'M':>6} {'N':>6} {'γ':>5} {'σ':>6}  розбиття"
    lines = [header, '-' * len(header)]
    for entry in problems.catalog():
        d = entry.defaults
        layouts = ','.join(entry.layouts) or '-'
        reference = f'reference: {entry.reference}'
        lines.append(f"{entry.id:<18} {reference:<26} {d['M']:>6} {d['N']:>6} {float(d['gamma']):>5g} "
                     f"{float(d['sigma']):>6g}  {layouts}")
    return '\n'.join(lines)


def load_quadstudy(path=None) -> Dict[str, Any]:
    """Параметри дослідження квадратур із секції [quadstudy]"""
    params: Dict[str, Any] = {'problem': 'poisson_smooth', 'simpson': [5, 9, 17, 33], 'mc': [25, 81, 289, 1089],
                              'seeds': [0, 1, 2, 3, 4], 'M': 200, 'N': 200, 'gamma': '1', 'sigma': 0.03, 'n_l': 10}
    if path is None:
        return params
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Файл конфігурації не знайдено: {path}")
    text = path.read_text(encoding='utf-8')
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as e:
        raise ConfigError(f"помилка синтаксису: {e}", line=getattr(e, 'lineno', None))
    if not parser.has_section('quadstudy'):
        raise ConfigError(f"Файл {path} не містить секції [quadstudy]")
    section = parser['quadstudy']
    index = _line_index(text)
    for key, raw in section.items():
        try:
            if key in ('simpson', 'mc', 'seeds'):
                params[key] = [int(v) for v in _split(raw)]
            elif key in ('M', 'N', 'n_l'):
                params[key] = int(raw)
            elif key == 'sigma':
                params[key] = float(raw)
            else:
                params[key] = raw.strip()
        except ValueError:
            raise ConfigError(f"некоректне значення '{raw}' для ключа '{key}'", line=index.get(('quadstudy', key)))
    return params


def quadrature_study(config_path=None, out_dir: str = 'results', seed: Optional[int] = None,
                     jobs: int = 1) -> List[Dict[str, Any]]:
    """
    Порівняння формули Сімпсона та Монте-Карло для слабкої форми

    Returns:
        Рядки (method, n_points, rel_l2) з медіаною по зернах; також записуються у quadstudy.csv
    """
    params = load_quadstudy(config_path)
    seeds = (seed,) if seed is not None else tuple(params['seeds'])
    base = ExperimentConfig(name='quadstudy', problem=params['problem'], method='WTN', M=params['M'], N=params['N'],
                            gamma=str(params['gamma']), sigma=params['sigma'], n_l=params['n_l'], seeds=seeds)
    configs = []
    for n in params['simpson']:
        configs.append(dataclasses.replace(base, name=f'simp{n}', quadrature='simpson', points_per_axis=n))
    for n in params['mc']:
        configs.append(dataclasses.replace(base, name=f'mc{n}', quadrature='mc', mc_samples=n))
    for config in configs:
        _validate(config, {})
    reports, failures = execute_jobs(expand_jobs(configs), None, jobs)
    for name, error in failures:
        logger.error(f"Дослідження квадратур: {name}: {error}")
    rows = []
    for config in configs:
        errors = [r.rel_l2 for r in reports if r.experiment.startswith(config.name + '_')]
        method = 'SIMP' if config.quadrature == 'simpson' else 'MC'
        n_points = config.points_per_axis ** 2 if method == 'SIMP' else config.mc_samples
        rows.append({'method': method, 'n_points': n_points,
                     'rel_l2': float(np.median(errors)) if errors else float('nan')})
    ensure_directory(out_dir)
    _write_rows(Path(out_dir) / 'quadstudy.csv', rows, ('method', 'n_points', 'rel_l2'))
    return rows


def gamma_sweep(M_values: Sequence[int] = (200, 400), sigma_f_values: Sequence[float] = DEFAULT_SIGMA_F,
                gamma_grid: Sequence[float] = DEFAULT_GAMMA_GRID, seeds: Sequence[int] = (0, 1, 2, 3, 4),
                n_test: int = 101, variant: str = 'bump', out_dir: str = 'results') -> List[Dict[str, Any]]:
    """Дослідження параметра форми з записом gamma_sweep.csv та gamma_curves.csv"""
    rows = shape_sweep(M_values, sigma_f_values, gamma_grid, seeds, n_test, variant)
    ensure_directory(out_dir)
    _write_rows(Path(out_dir) / 'gamma_sweep.csv', rows, ('sigma_f', 'M', 'gamma_opt', 'error_opt'))
    curves = [{'sigma_f': row['sigma_f'], 'M': row['M'], 'gamma': float(g), 'error': e}
              for row in rows for g, e in zip(gamma_grid, row['curve'])]
    _write_rows(Path(out_dir) / 'gamma_curves.csv', curves, ('sigma_f', 'M', 'gamma', 'error'))
    return rows


def _write_rows(path: Path, rows: Sequence[Dict[str, Any]], columns: Sequence[str]):
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), extrasaction='ignore')
        writer.writeheader()
        writer.writerows(rows)
    logger.info(f"Записано {len(rows)} рядків у {path}")
