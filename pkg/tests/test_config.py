from config import DEFAULTS, apply_env_overrides, load_config


def test_environment_overrides_file_values(tmp_path):
    path = tmp_path / 'config.yaml'
    path.write_text('run:\n  seed: 3\nbench:\n  batch: 4\n')
    conf = load_config(path, environ={'SPECTRAL_RUN__SEED': '7', 'SPECTRAL_BENCH__LENGTHS': '[16, 32]',
                                      'OTHER_RUN__SEED': '9'})
    assert conf['run']['seed'] == 7
    assert conf['bench']['lengths'] == [16, 32]
    assert conf['bench']['batch'] == 4
    assert conf['bench']['repeats'] == DEFAULTS['bench']['repeats']

def test_missing_file_falls_back_to_defaults(tmp_path):
    conf = load_config(tmp_path / 'absent.yaml', environ={})
    assert conf == DEFAULTS

def test_overrides_do_not_mutate_the_input():
    conf = {'run': {'seed': 1}}
    out = apply_env_overrides(conf, {'SPECTRAL_RUN__SEED': '2', 'SPECTRAL_SEED': '5'})
    assert conf == {'run': {'seed': 1}}
    assert out == {'run': {'seed': 2}}
