'''Command-line front end.

Subcommands map one-to-one onto the library pipelines:

    solve    integrate a seed into a candidate field
    verify   residuals of the invariance and triangular laws
    frame    complete generators and check the dual frame algebra
    chart    integrate dual coordinates and check pushforwards
    torsion  Nijenhuis torsion of multiplication by the field
    all      the full pipeline on one input

Reports are JSON, written atomically next to a delimited table and,
for numeric content, rendered figures.  Without --out the JSON goes to
stdout and the summary to stderr, so reports pipe cleanly.  Exit codes
separate wrong mathematics (1) from wrong invocations (2).
'''

import argparse
import json
import os
import random
import sys
from types import SimpleNamespace

from .blocks import BlockShape, VectorField, dual_product, invert
from .calculus import (
    Residual, atlas_residual, ei_residual, hm_residual, mult_operator,
    nijenhuis_torsion,
)
from .chart import ChartSpec, integrate_chart, pushforward_check
from .errors import MathError, NoPolynomialSolution, ShapeMismatch, UsageError
from .frame import (
    build_frame, commutation_check, construct_a, corollary_check,
    frame_product_check, recursion_check, v2_conditions,
)
from .reporting import (
    json_text, render_chart_samples, render_error_bars,
    render_point_errors, write_csv, write_json,
)
from .sampling import sample_points
from .scalar import parse_scalar
from .solver import EISeed, euler_seed, solve


# ---- option handling ----

def _parse_shape(v):
    if isinstance(v, (list, tuple)):
        return tuple(int(x) for x in v)
    try:
        return tuple(int(p) for p in str(v).split(','))
    except ValueError:
        raise UsageError(f'bad shape {v!r}; expected e.g. 3,2,1') from None


def _parse_floats(v):
    if isinstance(v, (list, tuple)):
        return tuple(float(x) for x in v)
    try:
        return tuple(float(p) for p in str(v).split(','))
    except ValueError:
        raise UsageError(f'bad coordinate list {v!r}') from None


def _choice(*allowed):
    def parse(v):
        if v not in allowed:
            raise UsageError(f'expected one of {", ".join(allowed)}, got {v!r}')
        return v
    return parse


# name -> (coerce, default, help)
_OPTIONS = {
    'shape': (_parse_shape, None, 'block sizes, e.g. 3,2,1'),
    'seed': (str, None, 'seed JSON file'),
    'field': (str, None, "field JSON file ('-' reads stdin)"),
    'a2': (str, None, 'leading generators, one expression in u1,u2 per '
                      'block of size >= 2, comma separated (default u2)'),
    'backend': (_choice('poly', 'rational', 'jet'), 'rational',
                'scalar backend for residuals'),
    'mode': (_choice('exact', 'numeric'), 'exact', 'generator completion mode'),
    'points': (int, 20, 'sample count for jet checks'),
    'rng': (int, 0, 'random seed for sample draws'),
    'tol': (float, 1e-9, 'tolerance for numeric residuals'),
    'order': (int, 3, 'jet truncation order'),
    'anchor': (float, 1.0, 'leading-coordinate slice for numeric completion'),
    'step': (float, 1e-3, 'integration step'),
    'p0': (_parse_floats, None, 'chart base point (default all ones)'),
    'wmax': (float, 0.3, 'chart grid radius'),
    'wpoints': (int, 12, 'random chart grid points'),
    'out': (str, None, 'report path; JSON goes to stdout when omitted'),
    'figures': (str, None, "figure directory, or 'none' to disable"),
    'config': (str, None, 'JSON config file; explicit flags win'),
}

_COMMON = ('config', 'out', 'figures')
_COMMANDS = {
    'solve': _COMMON + ('shape', 'seed'),
    'verify': _COMMON + ('shape', 'seed', 'field', 'backend', 'points',
                         'rng', 'tol', 'order'),
    'frame': _COMMON + ('shape', 'seed', 'field', 'a2', 'mode', 'points',
                        'rng', 'tol', 'order', 'anchor', 'step'),
    'chart': _COMMON + ('shape', 'seed', 'field', 'a2', 'p0', 'wmax',
                        'wpoints', 'rng', 'tol', 'step'),
    'torsion': _COMMON + ('shape', 'seed', 'field', 'backend', 'points',
                          'rng', 'tol', 'order'),
    'all': _COMMON + ('shape', 'seed', 'a2', 'backend', 'points', 'rng',
                      'tol', 'order', 'p0', 'wmax', 'wpoints', 'step'),
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog='fmanifold',
        description='construct and verify eventual identities on regular '
                    'F-manifolds with Jordan-block multiplication')
    subs = parser.add_subparsers(dest='command', required=True)
    for command, names in _COMMANDS.items():
        sub = subs.add_parser(command)
        for name in names:
            sub.add_argument('--' + name, dest=name, default=None,
                             help=_OPTIONS[name][2])
    return parser


def _resolve(args):
    '''Merge flag, config-file, and default values; flags win.'''
    names = _COMMANDS[args.command]
    data = {}
    if args.config is not None:
        data = _load_json(args.config)
        if not isinstance(data, dict):
            raise UsageError(f'{args.config} must hold a JSON object')
        unknown = set(data) - set(_OPTIONS)
        if unknown:
            raise UsageError(f'unknown config keys: {", ".join(sorted(unknown))}')
    cfg = {'command': args.command}
    for name in names:
        coerce, default, _ = _OPTIONS[name]
        value = getattr(args, name)
        if value is None:
            value = data.get(name)
        cfg[name] = default if value is None else coerce(value)
    return cfg


# ---- input plumbing ----

def _load_json(path):
    try:
        with open(path, encoding='utf-8') as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f'cannot read {path}: {exc.strerror or exc}') from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f'{path} is not valid JSON: {exc}') from exc


def _json_text(text, origin):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f'{origin} is not valid JSON: {exc}') from exc


def _seed_from(cfg):
    if cfg.get('seed') is not None:
        seed = EISeed.from_json(_load_json(cfg['seed']))
        if cfg.get('shape') is not None and cfg['shape'] != seed.shape.sizes:
            raise ShapeMismatch('--shape disagrees with the seed file')
        return seed
    if cfg.get('shape') is None:
        raise UsageError('need --shape or --seed')
    return euler_seed(BlockShape(cfg['shape']))


def _field_document(cfg):
    '''Field JSON from --field, stdin, or None to signal solving instead.'''
    src = cfg.get('field')
    if src == '-':
        data = _json_text(sys.stdin.read(), 'stdin')
    elif src is not None:
        data = _load_json(src)
    elif cfg.get('seed') is not None or cfg.get('shape') is not None:
        return None
    elif not sys.stdin.isatty():
        data = _json_text(sys.stdin.read(), 'stdin')
    else:
        raise UsageError('need --field, --seed, --shape, or piped input')
    if isinstance(data, dict) and 'field' in data:
        data = data['field']
    if not isinstance(data, dict) or 'shape' not in data or 'components' not in data:
        raise UsageError('input is not a field document')
    return data


def _field_from(cfg, backend='poly'):
    data = _field_document(cfg)
    if data is None:
        return solve(_seed_from(cfg)).field
    field = VectorField.from_json(data, backend=backend)
    if cfg.get('shape') is not None and cfg['shape'] != field.shape.sizes:
        raise ShapeMismatch('--shape disagrees with the field document')
    return field


def _solved_from(cfg):
    '''A solved field, or a bare field wrapped to look like one.'''
    if cfg.get('field') is not None:
        field = _field_from(cfg)
        return SimpleNamespace(field=field, shape=field.shape)
    return solve(_seed_from(cfg))


def _a2_list(cfg, shape):
    needed = [alpha for alpha, m in shape.blocks() if m >= 2]
    text = cfg.get('a2')
    if text is None:
        texts = ['u2'] * len(needed)
    else:
        texts = [t.strip() for t in text.split(',')]
        if len(texts) != len(needed):
            raise UsageError(f'--a2 needs {len(needed)} expressions '
                             f'(one per block of size >= 2), got {len(texts)}')
    out = [None] * shape.r
    for alpha, expr in zip(needed, texts):
        mapping = {1: shape.flat(alpha, 1), 2: shape.flat(alpha, 2)}
        out[alpha - 1] = parse_scalar(expr, 'poly', 2).remap(shape.n, mapping)
    return out


# ---- residual helpers ----

def _sampled(check, field, points, order, rng_seed):
    '''Run an exact check on jets at many points; keep per-point maxima.'''
    entries = []
    per_point = []
    identity = None
    for p in points:
        r = check(field.to_jet(p, order))
        identity = r.identity
        entries.extend(r.entries)
        per_point.append(float(r.max_abs()))
    return Residual(identity, 'jet', entries, seed=rng_seed), per_point


def _passes(residual, tol):
    exact = residual.backend in ('poly', 'rational')
    return residual.is_zero(0 if exact else tol)


def _check_rows(section, residuals, tol):
    rows = []
    lines = []
    for r in residuals:
        ok = _passes(r, tol)
        exact = r.backend in ('poly', 'rational')
        mag = '0(exact)' if exact and ok else f'{float(r.max_abs()):.6e}'
        status = 'ok' if ok else 'FAIL'
        rows.append((section, r.identity, r.backend, mag, status))
        line = f'  {r.identity} [{r.backend}]: {mag} {status}'
        worst = r.worst()
        if not ok and worst is not None:
            line += f'  worst entry {dict(worst.label)}'
            if worst.point is not None:
                line += f' at {tuple(round(float(x), 6) for x in worst.point)}'
        lines.append(line)
    return rows, lines


def _bars_figure(rows, title):
    labels = [f'{r[0]}:{r[1]}' if r[0] else r[1] for r in rows]
    values = [0.0 if r[3] == '0(exact)' else float(r[3]) for r in rows]
    return lambda path: render_error_bars(path, labels, values, title)


# ---- runners: each returns (payload, lines, (header, rows), figures, ok) ----

def run_solve(cfg):
    seed = _seed_from(cfg)
    sol = solve(seed)
    shape = sol.shape
    payload = {'command': 'solve', 'shape': list(shape.sizes),
               'field': sol.field.to_json(), 'seed': seed.to_json()}
    rows = []
    for alpha, m in shape.blocks():
        for i in range(1, m + 1):
            flat = shape.flat(alpha, i)
            rows.append((flat, alpha, i, sol.field.components[flat - 1].to_expr()))
    lines = [f'  solved shape {shape.sizes}'] + [
        f'  E[{flat}] = {expr}' for flat, _, _, expr in rows]
    return payload, lines, (('flat', 'block', 'index', 'component'), rows), [], True


def run_verify(cfg):
    backend = cfg['backend']
    field = _field_from(cfg, backend='poly' if backend == 'poly' else 'rational')
    figures = []
    if backend == 'jet':
        pts = sample_points(field.shape, cfg['points'], cfg['rng'])
        ei, ei_pts = _sampled(ei_residual, field, pts, cfg['order'], cfg['rng'])
        atlas, atlas_pts = _sampled(atlas_residual, field, pts, cfg['order'], cfg['rng'])
        checks = [ei, atlas]
        figures.append(('points', lambda path: render_point_errors(
            path, [ei.identity, atlas.identity], [ei_pts, atlas_pts],
            'residuals per sample point')))
    else:
        checks = [ei_residual(field), atlas_residual(field)]
    ok = all(_passes(r, cfg['tol']) for r in checks)
    payload = {'command': 'verify', 'shape': list(field.shape.sizes),
               'backend': backend, 'tol': cfg['tol'],
               'checks': [r.to_report(cfg['tol']) for r in checks], 'pass': ok}
    rows, lines = _check_rows('verify', checks, cfg['tol'])
    figures.insert(0, ('checks', _bars_figure(rows, 'verification residuals')))
    header = ('section', 'check', 'backend', 'max_abs', 'status')
    return payload, lines, (header, rows), figures, ok


def run_torsion(cfg):
    backend = cfg['backend']
    field = _field_from(cfg, backend='poly' if backend == 'poly' else 'rational')
    figures = []
    if backend == 'jet':
        pts = sample_points(field.shape, cfg['points'], cfg['rng'])
        check, per_pts = _sampled(lambda f: nijenhuis_torsion(mult_operator(f)),
                                  field, pts, cfg['order'], cfg['rng'])
        figures.append(('points', lambda path: render_point_errors(
            path, [check.identity], [per_pts], 'torsion per sample point')))
    else:
        check = nijenhuis_torsion(mult_operator(field))
    ok = _passes(check, cfg['tol'])
    payload = {'command': 'torsion', 'shape': list(field.shape.sizes),
               'backend': backend, 'tol': cfg['tol'],
               'checks': [check.to_report(cfg['tol'])], 'pass': ok}
    rows, lines = _check_rows('torsion', [check], cfg['tol'])
    figures.insert(0, ('checks', _bars_figure(rows, 'torsion residual')))
    header = ('section', 'check', 'backend', 'max_abs', 'status')
    return payload, lines, (header, rows), figures, ok


def _frame_exact(cfg, sol, a2):
    try:
        gens = construct_a(sol, a2, mode='exact')
    except NoPolynomialSolution as exc:
        raise NoPolynomialSolution(f'{exc}; retry with --mode numeric') from exc
    frame = build_frame(sol.field, gens)
    checks = [v2_conditions(frame), frame_product_check(frame),
              recursion_check(frame), commutation_check(frame),
              corollary_check(frame)]
    ok = all(_passes(r, cfg['tol']) for r in checks)
    payload = {'command': 'frame', 'mode': 'exact',
               'shape': list(sol.shape.sizes), 'tol': cfg['tol'],
               'frame': frame.to_json(),
               'checks': [r.to_report(cfg['tol']) for r in checks], 'pass': ok}
    rows, lines = _check_rows('frame', checks, cfg['tol'])
    return payload, lines, rows, [], ok


def _frame_numeric(cfg, sol, a2):
    gens = construct_a(sol, a2, mode='numeric', u1_0=cfg['anchor'],
                       step=cfg['step'], order=cfg['order'])
    shape = sol.shape
    sign = 1.0 if cfg['anchor'] >= 0 else -1.0
    leads = {shape.flat(alpha, 1) - 1 for alpha, _ in shape.blocks()}
    pts = [tuple(sign * abs(x) if i in leads else x for i, x in enumerate(p))
           for p in sample_points(shape, cfg['points'], cfg['rng'])]
    cond_entries = []
    prod_entries = []
    per_point = []
    for p in pts:
        jets = gens.generator_jets(p)
        fr = build_frame(sol.field.to_jet(p, cfg['order']), jets,
                         tol=max(cfg['tol'], 1e-10))
        cond = v2_conditions(fr)
        prod = frame_product_check(fr)
        cond_entries.extend(cond.entries)
        prod_entries.extend(prod.entries)
        per_point.append(max(float(cond.max_abs()), float(prod.max_abs())))
    checks = [Residual('generator-conditions', 'jet', cond_entries, seed=cfg['rng']),
              Residual('frame-product', 'jet', prod_entries, seed=cfg['rng'])]
    ok = all(_passes(r, cfg['tol']) for r in checks)
    payload = {'command': 'frame', 'mode': 'numeric',
               'shape': list(shape.sizes), 'anchor': cfg['anchor'],
               'order': cfg['order'], 'points': len(pts), 'tol': cfg['tol'],
               'checks': [r.to_report(cfg['tol']) for r in checks], 'pass': ok}
    rows, lines = _check_rows('frame', checks, cfg['tol'])
    figures = [('points', lambda path: render_point_errors(
        path, ['frame checks'], [per_point], 'frame residuals per sample point'))]
    return payload, lines, rows, figures, ok


def run_frame(cfg):
    sol = _solved_from(cfg)
    a2 = _a2_list(cfg, sol.shape)
    if cfg['mode'] == 'numeric':
        payload, lines, rows, figures, ok = _frame_numeric(cfg, sol, a2)
    else:
        payload, lines, rows, figures, ok = _frame_exact(cfg, sol, a2)
    figures.insert(0, ('checks', _bars_figure(rows, 'frame residuals')))
    header = ('section', 'check', 'backend', 'max_abs', 'status')
    return payload, lines, (header, rows), figures, ok


def _chart_grid(cfg, n):
    rng = random.Random(cfg['rng'])
    grid = [(0.0,) * n]
    for _ in range(cfg['wpoints']):
        grid.append(tuple(rng.uniform(-cfg['wmax'], cfg['wmax']) for _ in range(n)))
    return grid


def run_chart(cfg):
    sol = _solved_from(cfg)
    a2 = _a2_list(cfg, sol.shape)
    gens = construct_a(sol, a2, mode='exact')
    frame = build_frame(sol.field, gens)
    n = sol.shape.n
    p0 = cfg['p0'] if cfg['p0'] is not None else (1.0,) * n
    if len(p0) != n:
        raise UsageError(f'--p0 needs {n} coordinates, got {len(p0)}')
    spec = ChartSpec(p0, _chart_grid(cfg, n), step=cfg['step'], tol=cfg['tol'])
    result = integrate_chart(frame, spec)
    push = pushforward_check(frame, result)
    report = result.to_report()
    payload = {'command': 'chart', 'shape': list(sol.shape.sizes),
               'chart': report, 'checks': [push.to_report(cfg['tol'])],
               'pass': True}
    lines = [f'  {len(report["samples"])} samples from {tuple(p0)}',
             f'  max flow-order gap {result.max_commute_gap():.6e}',
             f'  max frame defect {result.max_jac_err():.6e}',
             f'  max product defect {result.max_push_err():.6e}']
    header = ['sample'] + [f'w{i}' for i in range(1, n + 1)] + \
             [f'u{i}' for i in range(1, n + 1)] + ['jac_err', 'push_err']
    rows = []
    for k, s in enumerate(report['samples']):
        rows.append([k] + list(s['w']) + list(s['u']) + [s['jac_err'], s['push_err']])
    figures = [('chart', lambda path: render_chart_samples(path, report))]
    return payload, lines, (tuple(header), rows), figures, True


def run_all(cfg):
    seed = _seed_from(cfg)
    sol = solve(seed)
    sections = {}
    all_lines = []
    all_rows = []
    figures = []
    ok = True

    sub = dict(cfg)
    sub['field'] = None
    payload, lines, _, _, _ = run_solve(sub)
    sections['solve'] = payload
    all_lines += ['solve:'] + lines

    checks = [ei_residual(sol.field), atlas_residual(sol.field)]
    rows, lines = _check_rows('verify', checks, cfg['tol'])
    sections['verify'] = {'backend': 'poly', 'tol': cfg['tol'],
                          'checks': [r.to_report(cfg['tol']) for r in checks],
                          'pass': all(_passes(r, cfg['tol']) for r in checks)}
    ok = ok and sections['verify']['pass']
    all_rows += rows
    all_lines += ['verify:'] + lines

    rat = sol.field.to_rational()
    inv = invert(rat)
    hm = hm_residual(lambda x, y: dual_product(x, y, inv), sol.shape,
                     like=rat.components[0])
    rows, lines = _check_rows('dual', [hm], cfg['tol'])
    sections['dual'] = {'checks': [hm.to_report(cfg['tol'])],
                        'pass': _passes(hm, cfg['tol'])}
    ok = ok and sections['dual']['pass']
    all_rows += rows
    all_lines += ['dual product:'] + lines

    frame_payload, lines, frame_rows, _, frame_ok = _frame_exact(
        cfg, sol, _a2_list(cfg, sol.shape))
    sections['frame'] = frame_payload
    ok = ok and frame_ok
    all_rows += frame_rows
    all_lines += ['frame:'] + lines

    chart_payload, lines, _, chart_figures, _ = run_chart(sub)
    sections['chart'] = chart_payload
    all_lines += ['chart:'] + lines
    figures += chart_figures

    torsion_check = nijenhuis_torsion(mult_operator(sol.field))
    rows, lines = _check_rows('torsion', [torsion_check], cfg['tol'])
    sections['torsion'] = {'backend': sol.field.backend,
                           'checks': [torsion_check.to_report(cfg['tol'])],
                           'pass': _passes(torsion_check, cfg['tol'])}
    ok = ok and sections['torsion']['pass']
    all_rows += rows
    all_lines += ['torsion:'] + lines

    payload = {'command': 'all', 'shape': list(sol.shape.sizes)}
    payload.update(sections)
    payload['pass'] = ok
    figures.insert(0, ('checks', _bars_figure(all_rows, 'pipeline residuals')))
    header = ('section', 'check', 'backend', 'max_abs', 'status')
    return payload, all_lines, (header, all_rows), figures, ok


_RUNNERS = {
    'solve': run_solve,
    'verify': run_verify,
    'frame': run_frame,
    'chart': run_chart,
    'torsion': run_torsion,
    'all': run_all,
}


# ---- output assembly ----

def _emit(cfg, payload, lines, table, figures):
    out = cfg.get('out')
    if out is None:
        sys.stdout.write(json_text(payload))
        print('\n'.join(lines), file=sys.stderr)
        return
    write_json(out, payload)
    stem = os.path.splitext(out)[0]
    header, rows = table
    write_csv(stem + '.csv', header, rows)
    created = [out, stem + '.csv']
    fig_dir = cfg.get('figures')
    if fig_dir != 'none':
        if fig_dir is None:
            fig_dir = os.path.dirname(os.path.abspath(out))
        else:
            os.makedirs(fig_dir, exist_ok=True)
        for suffix, render in figures:
            path = os.path.join(fig_dir, f'{os.path.basename(stem)}_{suffix}.png')
            render(path)
            created.append(path)
    print('\n'.join(lines))
    for path in created:
        print(f'wrote {path}')


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        payload, lines, table, figures, ok = _RUNNERS[cfg['command']](cfg)
        _emit(cfg, payload, lines, figures=figures, table=table)
    except UsageError as exc:
        print(f'error: {exc}', file=sys.stderr)
        return 2
    except MathError as exc:
        print(f'failure: {exc}', file=sys.stderr)
        return 1
    return 0 if ok else 1


if __name__ == '__main__':
    sys.exit(main())
