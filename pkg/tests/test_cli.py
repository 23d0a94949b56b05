"""
命令行与配置测试
"""

import json

import pytest
from pydantic import ValidationError

from config import load_overrides, merge_config, parse_overrides
from main import build_parser, build_run_config, main
from src.cli import RunConfig
from src.cli.output import SCHEMAS, build_metadata, format_table, read_csv, write_table
from src.mesh import read_mesh


# 正对角线结构网格 n = 4 上的离散特征值
SQUARE_H4 = [708.44069, 708.44408, 2356.207, 4268.371, 5029.736]


@pytest.fixture
def overrides(tmp_path):
    """关闭日志文件与进度条的覆盖文件"""
    path = tmp_path / "overrides.cfg"
    path.write_text("logging.file=\noutput.progress=false\n", encoding='utf-8')
    return str(path)


class TestConfig:
    """配置覆盖"""

    def test_parse_overrides(self):
        parsed = parse_overrides(["# comment", "", "solver.tol=1.0e-8", "run.levels=[4, 8]",
                                  "assembly.deterministic=false"])
        assert parsed == {'solver': {'tol': 1e-8}, 'run': {'levels': [4, 8]},
                          'assembly': {'deterministic': False}}

    def test_parse_overrides_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_overrides(["solver.tol 1e-8"])

    def test_merge_is_deep_and_pure(self, config):
        merged = merge_config(config, {'solver': {'tol': 1e-6}})
        assert merged['solver']['tol'] == 1e-6
        assert merged['solver']['max_iterations'] == config['solver']['max_iterations']
        assert config['solver']['tol'] == 1e-10

    def test_yaml_override_file(self, tmp_path):
        path = tmp_path / "local.yaml"
        path.write_text("element:\n  k: 5\n", encoding='utf-8')
        assert load_overrides(str(path)) == {'element': {'k': 5}}
        with pytest.raises(FileNotFoundError):
            load_overrides(str(tmp_path / "absent.yaml"))


class TestRunConfig:
    """参数模型"""

    def test_defaults_from_config(self, config):
        args = build_parser().parse_args(['eigs', '--domain', 'square-hole', '--nev', '2'])
        run = build_run_config(args, config)
        assert run.domain == 'square_hole'
        assert run.nev == 2
        assert run.k == config['element']['k']
        assert run.tol == config['solver']['tol']

    def test_validation(self):
        with pytest.raises(ValidationError):
            RunConfig(command='eigs', k=3)
        with pytest.raises(ValidationError):
            RunConfig(command='eigs', nev=0)
        with pytest.raises(ValidationError, match='minimum 3 levels'):
            RunConfig(command='rates', levels=[4, 8])
        with pytest.raises(ValidationError):
            RunConfig(command='adapt', theta=1.0)
        with pytest.raises(ValidationError):
            RunConfig(command='eigs', domain='circle')

    def test_to_config(self, config):
        run = RunConfig(command='estimate', k=5, sigma=10.0, aggregation='rss', eig_index=2)
        updated = run.to_config(config)
        assert updated['element']['k'] == 5
        assert updated['solver']['shift'] == 10.0
        assert updated['estimator'] == {**config['estimator'], 'aggregation': 'rss', 'theta': 0.5, 'eig_index': 2}
        assert config['element']['k'] == 4


class TestOutput:
    """结果文件"""

    def test_csv_header_and_missing_values(self, tmp_path):
        rows = [{'h': 0.25, 'lambda_1': 708.1, 'err': 1.7e-4, 'order': None}]
        metadata = build_metadata('rates', {'k': 4}, deterministic=True)
        path = write_table(rows, SCHEMAS['rates'], tmp_path / "rates.csv", 'csv', metadata)
        lines = path.read_text(encoding='utf-8').splitlines()
        assert lines[0] == "# command: rates"
        assert 'created' not in metadata
        table = read_csv(path)
        assert table['rows'][0] == {'h': '0.25', 'lambda_1': '708.1', 'err': '0.00017', 'order': ''}
        assert json.loads(table['metadata']['config']) == {'k': 4}

    def test_timestamp_only_when_not_deterministic(self):
        assert 'created' in build_metadata('eigs', {}, deterministic=False)

    def test_json_payload(self, tmp_path):
        rows = [{'suite': 'conformity', 'passed': True, 'detail': 'ok', 'ignored': 1}]
        path = write_table(rows, SCHEMAS['check-element'], tmp_path / "check.json", 'json', {'command': 'x'},
                           extra={'slopes': {'bound': None}})
        payload = json.loads(path.read_text(encoding='utf-8'))
        assert payload['columns'] == SCHEMAS['check-element']
        assert payload['rows'] == [{'suite': 'conformity', 'passed': True, 'detail': 'ok'}]
        assert payload['slopes'] == {'bound': None}

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            write_table([], ['h'], tmp_path / "x.txt", 'xml')

    def test_format_table(self):
        text = format_table([{'h': 0.25, 'err': None}], ['h', 'err'])
        assert text.splitlines()[-1].split() == ['0.25', '-']


class TestMain:
    """main() 退出码与输出"""

    def test_eigs_square(self, tmp_path, overrides):
        out = tmp_path / "eigs.csv"
        code = main(['eigs', '--domain', 'square', '--k', '4', '--levels', '4', '--nev', '5',
                     '--output', str(out), '--config', overrides])
        assert code == 0
        table = read_csv(out)
        row = table['rows'][0]
        assert float(row['h']) == 0.25
        for i, expected in enumerate(SQUARE_H4, 1):
            assert float(row[f'lambda_{i}']) == pytest.approx(expected, rel=1e-6)
        assert table['metadata']['command'] == 'eigs'
        assert table['metadata']['version']
        assert 'lambda_h(h_ref)' in table['metadata']['error_proxy']
        assert 'created' not in table['metadata']

    def test_deterministic_output_is_byte_identical(self, tmp_path, overrides):
        paths = [tmp_path / "first.csv", tmp_path / "second.csv"]
        for path in paths:
            assert main(['eigs', '--domain', 'lshape', '--levels', '2', '--nev', '2',
                         '--output', str(path), '--config', overrides]) == 0
        first, second = (p.read_bytes() for p in paths)
        assert first.replace(b'first.csv', b'') == second.replace(b'second.csv', b'')

    def test_json_format(self, tmp_path, overrides):
        out = tmp_path / "eigs.json"
        assert main(['eigs', '--levels', '2', '--nev', '1', '--format', 'json',
                     '--output', str(out), '--config', overrides]) == 0
        payload = json.loads(out.read_text(encoding='utf-8'))
        assert payload['columns'][-1] == 'max_residual'
        assert len(payload['rows']) == 1

    @pytest.mark.parametrize('argv', [
        ['eigs', '--nev', '0'],
        ['rates', '--levels', '4,8'],
        ['check-element', '--k', '3'],
        ['eigs', '--domain', 'circle'],
        ['adapt', '--theta', '1.5'],
        ['mesh', '--domain', 'lshape', '--levels', '3'],
        ['eigs', '--levels', 'four'],
    ])
    def test_usage_errors(self, argv, overrides):
        assert main(argv + ['--config', overrides]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(['eigs', '--config', str(tmp_path / "absent.cfg")]) == 2

    def test_mesh_export(self, tmp_path, overrides):
        out = tmp_path / "hole.mesh"
        assert main(['mesh', '--domain', 'square-hole', '--levels', '4', '--output', str(out),
                     '--config', overrides]) == 0
        mesh = read_mesh(out, domain='square_hole')
        assert (mesh.n_vertices, mesh.n_edges, mesh.n_triangles) == (24, 48, 24)

    def test_eigs_from_mesh_file(self, tmp_path, overrides):
        mesh_path = tmp_path / "square.mesh"
        assert main(['mesh', '--levels', '4', '--output', str(mesh_path), '--config', overrides]) == 0
        out = tmp_path / "eigs.csv"
        assert main(['eigs', '--mesh-file', str(mesh_path), '--nev', '1', '--output', str(out),
                     '--config', overrides]) == 0
        assert float(read_csv(out)['rows'][0]['lambda_1']) == pytest.approx(SQUARE_H4[0], rel=1e-6)

    def test_estimate_writes_entities(self, tmp_path, overrides):
        out = tmp_path / "estimate.csv"
        assert main(['estimate', '--domain', 'square', '--levels', '4', '--output', str(out),
                     '--config', overrides]) == 0
        series = read_csv(out)
        assert series['metadata']['eig_index'] == '3'
        entities = read_csv(tmp_path / "estimate_entities_n4.csv")
        # 32 个三角形 + 40 条内部边
        assert len(entities['rows']) == 72
        assert list(entities['rows'][0]) == SCHEMAS['entities']

    def test_check_slope_needs_three_levels(self, tmp_path, overrides):
        out = tmp_path / "estimate.csv"
        assert main(['estimate', '--levels', '4', '--check-slope', '0.25', '--output', str(out),
                     '--config', overrides]) == 2

    def test_adapt_trace(self, tmp_path, overrides):
        out = tmp_path / "adapt.csv"
        assert main(['adapt', '--domain', 'lshape', '--levels', '4', '--theta', '0.5', '--iterations', '1',
                     '--output', str(out), '--config', overrides]) == 0
        rows = read_csv(out)['rows']
        assert [row['iteration'] for row in rows] == ['0', '1']
        assert int(rows[1]['n_triangles']) > int(rows[0]['n_triangles'])
        assert rows[1]['marked'] == '0'

    @pytest.mark.slow
    def test_check_element(self, tmp_path, overrides):
        out = tmp_path / "check.csv"
        assert main(['check-element', '--k', '4', '--output', str(out), '--config', overrides]) == 0
        rows = read_csv(out)['rows']
        assert {row['suite'] for row in rows} == {'unisolvence', 'conformity', 'reproduction',
                                                   'interpolation_order'}
        assert all(row['passed'] == 'true' for row in rows)

    @pytest.mark.slow
    def test_rates_square(self, tmp_path, overrides):
        out = tmp_path / "rates.csv"
        assert main(['rates', '--domain', 'square', '--levels', '4,8,16', '--output', str(out),
                     '--config', overrides]) == 0
        rows = read_csv(out)['rows']
        assert rows[0]['order'] == '' and rows[2]['err'] == ''
        assert float(rows[1]['order']) >= 3.0


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
