'''Report serialization: canonical JSON, delimited tables, figures.

All writers are atomic (temp file then rename) and deterministic:
key-sorted JSON, fixed line endings, figures rendered without
environment-dependent metadata. Matplotlib is imported lazily so the
exact and solver paths never pay for it.
'''

import csv
import io
import json
import os
import tempfile


def json_text(obj):
    '''Canonical JSON encoding used for both files and stdout.'''
    return json.dumps(obj, sort_keys=True, indent=2) + '\n'


def _atomic_write(path, data):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix='.tmp-report-')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as handle:
            handle.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    _atomic_write(path, json_text(obj))


def write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    _atomic_write(path, buf.getvalue())


def _pyplot():
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path):
    fig.savefig(path, dpi=120, metadata={'Software': None})


def render_error_bars(path, labels, values, title):
    '''Log-scale bar chart of residual magnitudes, one bar per check.

    Exact zeros are drawn at the plot floor so they stay visible.
    '''
    plt = _pyplot()
    floor = 1e-17
    heights = [max(float(v), floor) for v in values]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(labels) + 2.0), 3.6))
    ax.bar(range(len(labels)), heights, color='#4878a8')
    ax.set_yscale('log')
    ax.set_ylim(bottom=floor / 2)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha='right', fontsize=8)
    ax.set_ylabel('max |residual|')
    ax.set_title(title)
    ax.grid(True, axis='y', alpha=0.3)
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def render_chart_samples(path, report):
    '''Two panels: coordinate trajectories and per-sample error levels.'''
    plt = _pyplot()
    samples = report['samples']
    idx = range(len(samples))
    fig, (ax_u, ax_e) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    if samples:
        n = len(samples[0]['u'])
        for i in range(n):
            ax_u.plot(idx, [s['u'][i] for s in samples], marker='.', label=f'u{i + 1}')
        ax_u.legend(fontsize=8)
    ax_u.set_xlabel('sample')
    ax_u.set_ylabel('coordinate value')
    ax_u.set_title('chart images')
    ax_u.grid(True, alpha=0.3)
    floor = 1e-17
    ax_e.semilogy(idx, [max(s['jac_err'], floor) for s in samples], marker='.', label='frame defect')
    ax_e.semilogy(idx, [max(s['push_err'], floor) for s in samples], marker='.', label='product defect')
    ax_e.axhline(report['tol'], color='crimson', linestyle='--', linewidth=1, label='tol')
    ax_e.legend(fontsize=8)
    ax_e.set_xlabel('sample')
    ax_e.set_title('per-sample errors')
    ax_e.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def render_point_errors(path, labels, series, title):
    '''Semilogy scatter of per-point magnitudes for several checks.'''
    plt = _pyplot()
    floor = 1e-17
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    for label, values in zip(labels, series):
        ax.semilogy(range(len(values)), [max(float(v), floor) for v in values],
                    marker='.', linestyle='none', label=label)
    ax.set_xlabel('point')
    ax.set_ylabel('|residual|')
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)
