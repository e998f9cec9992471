'''End-to-end behavior of the command-line front end.'''

import json
import subprocess
import sys

import pytest

from fmanifold.cli import main

NO_POLY_SEED = {'shape': [4], 'seeds': [{'block': 1, 'f': ['u1', 'u1*u2', '0', 'u2^2']}]}


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_scaling_field(capsys):
    code, out, err = run_cli(capsys, 'solve', '--shape', '3,2')
    assert code == 0
    payload = json.loads(out)
    assert payload['command'] == 'solve'
    assert payload['shape'] == [3, 2]
    assert payload['field']['components'] == ['u1', 'u2', 'u3', 'u4', 'u5']
    assert 'solved shape' in err


def test_verify_accepts_solved_field(capsys):
    code, out, _ = run_cli(capsys, 'verify', '--shape', '3', '--backend', 'poly')
    assert code == 0
    payload = json.loads(out)
    assert payload['pass'] is True
    names = [c['identity'] for c in payload['checks']]
    assert names == ['eventual-identity', 'triangular-system']
    assert all(c['max_abs'] == '0(exact)' for c in payload['checks'])


def test_verify_rejects_bad_field(tmp_path, capsys):
    doc = {'shape': [2], 'components': ['u2', '0']}
    path = tmp_path / 'field.json'
    path.write_text(json.dumps(doc))
    code, out, _ = run_cli(capsys, 'verify', '--field', str(path))
    assert code == 1
    payload = json.loads(out)
    assert payload['pass'] is False
    atlas = payload['checks'][1]
    assert atlas['identity'] == 'triangular-system'
    assert atlas['worst_entry']['indices'] == {'block': 1, 'm': 1, 'l': 2}


def test_pipe_solve_into_verify():
    cmd = [sys.executable, '-m', 'fmanifold']
    solved = subprocess.run(cmd + ['solve', '--shape', '3,2'],
                            capture_output=True, text=True, check=True)
    verified = subprocess.run(cmd + ['verify'], input=solved.stdout,
                              capture_output=True, text=True)
    assert verified.returncode == 0
    assert json.loads(verified.stdout)['pass'] is True


def test_jet_runs_are_byte_identical(tmp_path):
    paths = []
    for name in ('one', 'two'):
        out = tmp_path / name / 'rep.json'
        out.parent.mkdir()
        code = main(['verify', '--shape', '3', '--backend', 'jet',
                     '--points', '5', '--rng', '7', '--out', str(out)])
        assert code == 0
        paths.append(out)
    for suffix in ('.json', '.csv'):
        a = paths[0].with_suffix(suffix).read_bytes()
        b = paths[1].with_suffix(suffix).read_bytes()
        assert a == b
    for fig in ('rep_checks.png', 'rep_points.png'):
        assert (paths[0].parent / fig).read_bytes() == (paths[1].parent / fig).read_bytes()
    payload = json.loads(paths[0].read_text())
    assert payload['checks'][0]['seed'] == 7
    assert payload['checks'][0]['backend'] == 'jet'


def test_report_files(tmp_path, capsys):
    out = tmp_path / 'rep.json'
    code, stdout, _ = run_cli(capsys, 'verify', '--shape', '3', '--out', str(out))
    assert code == 0
    assert out.exists()
    csv_text = (tmp_path / 'rep.csv').read_text()
    assert csv_text.splitlines()[0] == 'section,check,backend,max_abs,status'
    assert (tmp_path / 'rep_checks.png').exists()
    assert stdout.count('wrote ') == 3


def test_figures_can_be_disabled_or_redirected(tmp_path, capsys):
    out = tmp_path / 'rep.json'
    code, _, _ = run_cli(capsys, 'verify', '--shape', '3',
                         '--out', str(out), '--figures', 'none')
    assert code == 0
    assert not list(tmp_path.glob('*.png'))
    fig_dir = tmp_path / 'figs'
    code, _, _ = run_cli(capsys, 'verify', '--shape', '3',
                         '--out', str(out), '--figures', str(fig_dir))
    assert code == 0
    assert (fig_dir / 'rep_checks.png').exists()


def test_config_merge(tmp_path, capsys):
    cfg = tmp_path / 'cfg.json'
    cfg.write_text(json.dumps({'shape': '3', 'backend': 'jet', 'points': 4, 'rng': 1}))
    code, out, _ = run_cli(capsys, 'verify', '--config', str(cfg), '--rng', '9')
    assert code == 0
    payload = json.loads(out)
    assert payload['backend'] == 'jet'
    assert payload['checks'][0]['seed'] == 9  # flag beats config

    cfg.write_text(json.dumps({'shappe': '3'}))
    code, _, err = run_cli(capsys, 'verify', '--config', str(cfg))
    assert code == 2
    assert 'shappe' in err


def test_usage_errors(capsys, tmp_path):
    assert run_cli(capsys, 'solve')[0] == 2
    assert run_cli(capsys, 'solve', '--shape', 'x')[0] == 2
    assert run_cli(capsys, 'verify', '--field', str(tmp_path / 'nope.json'))[0] == 2
    assert run_cli(capsys, 'frame', '--shape', '3', '--a2', 'u2,u1')[0] == 2
    code, _, err = run_cli(capsys, 'verify', '--shape', '3', '--backend', 'sym')
    assert code == 2 and 'expected one of' in err


def test_shape_disagreement_is_usage(tmp_path, capsys):
    seed = tmp_path / 'seed.json'
    seed.write_text(json.dumps({'shape': [3], 'seeds': [{'block': 1, 'f': ['u1', '0', '0']}]}))
    assert run_cli(capsys, 'solve', '--seed', str(seed), '--shape', '4')[0] == 2
    field = tmp_path / 'field.json'
    field.write_text(json.dumps({'field': {'shape': [3], 'components': ['u1', 'u2', 'u3']}}))
    assert run_cli(capsys, 'verify', '--field', str(field), '--shape', '2,2')[0] == 2
    # the envelope form itself is accepted
    assert run_cli(capsys, 'verify', '--field', str(field))[0] == 0


def test_frame_math_failures(tmp_path, capsys):
    seed = tmp_path / 'seed.json'
    seed.write_text(json.dumps(NO_POLY_SEED))
    code, _, err = run_cli(capsys, 'frame', '--seed', str(seed))
    assert code == 1
    assert 'retry with --mode numeric' in err
    code, _, err = run_cli(capsys, 'frame', '--shape', '3', '--a2', 'u1^2')
    assert code == 1
    assert 'compatibility' in err


def test_frame_numeric_mode_recovers(tmp_path, capsys):
    seed = tmp_path / 'seed.json'
    seed.write_text(json.dumps(NO_POLY_SEED))
    code, out, _ = run_cli(capsys, 'frame', '--seed', str(seed),
                           '--mode', 'numeric', '--points', '3')
    assert code == 0
    payload = json.loads(out)
    assert payload['mode'] == 'numeric'
    assert payload['pass'] is True


def test_frame_exact_euler(capsys):
    code, out, _ = run_cli(capsys, 'frame', '--shape', '3')
    assert code == 0
    payload = json.loads(out)
    assert payload['mode'] == 'exact'
    assert payload['frame']['a'] == [{'block': 1, 'components': ['u2', '2*u3']}]
    names = [c['identity'] for c in payload['checks']]
    assert names == ['generator-conditions', 'frame-product', 'frame-recursion',
                     'frame-commutation', 'commutator-reduction']


def test_chart_cli(tmp_path, capsys):
    out = tmp_path / 'chart.json'
    code, stdout, _ = run_cli(capsys, 'chart', '--shape', '3',
                              '--wpoints', '2', '--out', str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    assert len(payload['chart']['samples']) == 3
    assert payload['chart']['h'] == 1e-3
    assert (tmp_path / 'chart_chart.png').exists()
    rows = (tmp_path / 'chart.csv').read_text().splitlines()
    assert rows[0].startswith('sample,w1,w2,w3,u1,u2,u3')
    assert len(rows) == 4


def test_torsion_cli(capsys):
    code, out, _ = run_cli(capsys, 'torsion', '--shape', '2,2', '--backend', 'poly')
    assert code == 0
    payload = json.loads(out)
    assert payload['checks'][0]['identity'] == 'nijenhuis'
    assert payload['pass'] is True


def test_all_pipeline(tmp_path, capsys):
    out = tmp_path / 'all.json'
    code, _, _ = run_cli(capsys, 'all', '--shape', '3',
                         '--wpoints', '2', '--out', str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    for section in ('solve', 'verify', 'dual', 'frame', 'chart', 'torsion'):
        assert section in payload, section
    assert payload['pass'] is True
    assert payload['dual']['checks'][0]['identity'] == 'product-invariance'
    assert (tmp_path / 'all_checks.png').exists()
    assert (tmp_path / 'all_chart.png').exists()
