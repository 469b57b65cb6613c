import os
import numpy as np
import pytest
import adaptivekg as akg

akg.set_verbose(False)


def write_split(path, rows):
	with open(str(path), 'w', encoding='utf-8') as f:
		for row in rows: f.write('\t'.join(row) + '\n')

def link_dataset(dirname, seed=0):
	rng = np.random.default_rng(seed)
	dirname.mkdir()
	def triples(n):
		return [('e%d' % rng.integers(15), 'r%d' % rng.integers(3), 'e%d' % rng.integers(15)) for _ in range(n)]
	write_split(dirname/'train.txt', triples(60))
	write_split(dirname/'valid.txt', triples(8))
	write_split(dirname/'test.txt', triples(8))
	return str(dirname)

def class_dataset(dirname):
	dirname.mkdir()
	train = [('e%d' % i, 'r%d' % (i % 2), 'e%d' % ((i + 1) % 12)) for i in range(12)]
	write_split(dirname/'train.txt', train)
	write_split(dirname/'dev.txt', [t + ('1',) for t in train[:4]] + [(t[0], t[1], 'e%d' % ((int(t[2][1:]) + 5) % 12), '-1')
		for t in train[:4]])
	write_split(dirname/'test.txt', [t + ('1',) for t in train[4:8]] + [(t[0], t[1], 'e%d' % ((int(t[2][1:]) + 5) % 12), '-1')
		for t in train[4:8]])
	return str(dirname)

def manifest(out, command):
	return akg.read_manifest(os.path.join(out, '%s_manifest.json' % command))

train_args = ['--variant', 'transA', '--k', '4', '--epochs', '3', '--validation-period', '1',
	'--alpha', '0.01', '--seed', '5', '--workers', '1', '--quiet']


def test_stats(tmp_path, capsys):
	d = link_dataset(tmp_path/'kg')
	out = str(tmp_path/'out')
	assert akg.main(['stats', '--dataset', d, '--out', out, '--quiet']) == 0
	with open(os.path.join(out, 'stats.csv')) as f:
		lines = f.read().splitlines()
	assert lines[0] == 'rel,ent,train,valid,test,atpe'
	ts = akg.read_dataset(d)
	assert lines[1].split(',')[2:5] == ['60', '8', '8']
	assert float(lines[1].split(',')[5]) == pytest.approx(76./ts.n_entities)
	assert '#Train 60' in capsys.readouterr().out
	assert manifest(out, 'stats')['artifacts']['stats'] == os.path.join(out, 'stats.csv')

def test_stats_missing_file(tmp_path, capsys):
	d = tmp_path/'kg'
	d.mkdir()
	write_split(d/'train.txt', [('A', 'r', 'B')])
	assert akg.main(['stats', '--dataset', str(d), '--out', str(tmp_path), '--quiet']) == 1
	err = capsys.readouterr().err.strip().splitlines()
	assert len(err) == 1
	assert err[0].startswith('akg-error stats: ')
	assert 'valid.txt' in err[0]

def test_dataset_root_from_environment(tmp_path, monkeypatch):
	link_dataset(tmp_path/'kg')
	monkeypatch.setenv('ADAPTIVEKG_DATA', str(tmp_path))
	monkeypatch.chdir(tmp_path/'kg')
	out = str(tmp_path/'out')
	assert akg.main(['stats', '--dataset', 'kg', '--out', out, '--quiet']) == 0

def test_train_then_eval_link(tmp_path):
	d  = link_dataset(tmp_path/'kg')
	o1 = str(tmp_path/'train')
	o2 = str(tmp_path/'eval')
	assert akg.main(['train', '--dataset', d, '--out', o1] + train_args) == 0
	model_file = os.path.join(o1, 'model.txt')
	man = manifest(o1, 'train')
	assert man['checkpoint_hash'] == akg.git_blob_hash(model_file)
	assert man['config']['k'] == 4 and man['seed'] == 5
	assert os.path.isfile(os.path.join(o1, 'train_report.csv'))
	assert os.listdir(os.path.join(o1, 'checkpoints'))
	assert akg.main(['eval-link', '--dataset', d, '--model', model_file, '--out', o2, '--quiet']) == 0
	assert manifest(o2, 'eval_link')['checkpoint_hash'] == man['checkpoint_hash']
	with open(os.path.join(o2, 'link_prediction.csv')) as f:
		assert f.readline().strip() == 'setting,mean_rank,hits_at_10'
	assert akg.main(['eval-link', '--dataset', d, '--model', model_file, '--out', o2,
		'--filtered-only', '--workers', '2', '--quiet']) == 0
	assert list(manifest(o2, 'eval_link')['results']) == ['filtered']

def test_replay_gives_identical_checkpoint(tmp_path):
	d = link_dataset(tmp_path/'kg')
	hashes = []
	for name in ('run1', 'run2'):
		out = str(tmp_path/name)
		assert akg.main(['train', '--dataset', d, '--out', out] + train_args) == 0
		hashes.append(manifest(out, 'train')['checkpoint_hash'])
	assert hashes[0] == hashes[1]

def test_eval_class_requires_labels(tmp_path, capsys):
	d = link_dataset(tmp_path/'kg')
	out = str(tmp_path/'train')
	assert akg.main(['train', '--dataset', d, '--out', out] + train_args) == 0
	capsys.readouterr()
	assert akg.main(['eval-class', '--dataset', d, '--model', os.path.join(out, 'model.txt'),
		'--out', out, '--quiet']) == 1
	assert 'akg-error eval-class: classification labels required' in capsys.readouterr().err

def test_classification_workflow(tmp_path):
	d = class_dataset(tmp_path/'wn')
	out = str(tmp_path/'out')
	assert akg.main(['train', '--dataset', d, '--out', out] + train_args) == 0
	assert manifest(out, 'train')['config']['mode'] == 'auto'
	model_file = os.path.join(out, 'model.txt')
	assert akg.main(['eval-class', '--dataset', d, '--model', model_file, '--out', out, '--quiet']) == 0
	acc = manifest(out, 'eval_class')['results']['accuracy']
	assert 0 <= acc <= 100
	with open(os.path.join(out, 'classification.csv')) as f:
		assert f.read().splitlines()[1].startswith('all,')
	assert akg.main(['analyze-weights', '--dataset', d, '--model', model_file, '--out', out, '--quiet']) == 0
	with open(os.path.join(out, 'weight_table.csv')) as f:
		lines = f.read().splitlines()
	assert lines[0] == 'relation,weight_difference,flagged,accuracy'
	assert len(lines) == 3
	assert akg.main(['analyze-weights', '--model', model_file, '--out', str(tmp_path/'w'), '--quiet']) == 0
	assert akg.main(['export-pca', '--dataset', d, '--model', model_file, '--relation', 'r0',
		'--n-unmatched', '3', '--out', out, '--quiet']) == 0
	with open(os.path.join(out, 'pca.csv')) as f:
		assert f.readline().strip() == 'name,tag,x,y'

def test_config_conflict_is_a_warning(tmp_path):
	d = link_dataset(tmp_path/'kg')
	out = str(tmp_path/'out')
	with pytest.warns(UserWarning, match='lambda'):
		status = akg.main(['train', '--dataset', d, '--out', out, '--variant', 'transe', '--lambda', '0.1',
			'--k', '3', '--epochs', '1', '--quiet'])
	assert status == 0

def test_config_file_grid_and_precedence(tmp_path):
	d = link_dataset(tmp_path/'kg')
	cfg = tmp_path/'grid.cfg'
	cfg.write_text('k = 2, 3\nepochs = 5\nvariant = transE\n', encoding='utf-8')
	out = str(tmp_path/'grid')
	assert akg.main(['train', '--dataset', d, '--config', str(cfg), '--epochs', '1', '--out', out, '--quiet']) == 0
	ks = []
	for run in ('run_000', 'run_001'):
		man = manifest(os.path.join(out, run), 'train')
		assert man['config']['epochs'] == 1
		ks.append(man['config']['k'])
	assert ks == [2, 3]

def test_preset(tmp_path):
	d = class_dataset(tmp_path/'wn')
	out = str(tmp_path/'out')
	assert akg.main(['train', '--dataset', d, '--preset', 'fb13', '--k', '3', '--epochs', '1',
		'--out', out, '--quiet']) == 0
	config = manifest(out, 'train')['config']
	assert (config['alpha'], config['gamma'], config['C'], config['k'], config['mode']) == (0.002, 3.0, 0.00002, 3, 'class')

def test_bad_config_value(tmp_path, capsys):
	d = link_dataset(tmp_path/'kg')
	assert akg.main(['train', '--dataset', d, '--alpha', '0', '--out', str(tmp_path), '--quiet']) == 1
	assert capsys.readouterr().err.startswith('akg-error train: alpha must be > 0')

def test_bad_argument_is_one_line(tmp_path, capsys):
	d = link_dataset(tmp_path/'kg')
	assert akg.main(['train', '--dataset', d, '--strategy', 'uniform', '--out', str(tmp_path)]) == 1
	err = capsys.readouterr().err.strip().splitlines()
	assert len(err) == 1
	assert err[0].startswith('akg-error train: ') and 'uniform' in err[0]
	assert akg.main(['eval-link', '--dataset', d]) == 1
	assert capsys.readouterr().err.startswith('akg-error eval-link: ')
	assert akg.main(['fit']) == 1
	assert capsys.readouterr().err.startswith('akg-error akg: ')
