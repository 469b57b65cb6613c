import numpy as np
import pytest
import adaptivekg as akg

akg.set_verbose(False)


def write_lines(path, lines):
	path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
	return str(path)

def make_dataset(dirname, train, valid, test, valid_name='valid.txt'):
	dirname.mkdir(exist_ok=True)
	write_lines(dirname/'train.txt', ['\t'.join(t) for t in train])
	write_lines(dirname/valid_name, ['\t'.join(t) for t in valid])
	write_lines(dirname/'test.txt', ['\t'.join(t) for t in test])
	return str(dirname)


def test_load_triples_column_order(tmp_path):
	hrt = akg.load_triples(write_lines(tmp_path/'a.txt', ['A\tr\tB']), column_order='hrt')
	htr = akg.load_triples(write_lines(tmp_path/'b.txt', ['A\tB\tr']), column_order='htr')
	assert hrt.triples == [('A', 'r', 'B')]
	assert htr.triples == [('A', 'r', 'B')]
	assert hrt.labels is None

def test_load_triples_labels(tmp_path):
	fn  = write_lines(tmp_path/'dev.txt', ['A\tr\tB\t1', 'A\tr\tC\t-1', '', 'B\tr\tC\t+1'])
	raw = akg.load_triples(fn)
	assert len(raw) == 3
	assert raw.labels == [True, False, True]

def test_load_triples_errors(tmp_path):
	fn = write_lines(tmp_path/'bad.txt', ['A\tr\tB', 'A\tr'])
	with pytest.raises(ValueError, match=':2:'):
		akg.load_triples(fn)
	fn = write_lines(tmp_path/'label.txt', ['A\tr\tB\t0'])
	with pytest.raises(ValueError, match='label'):
		akg.load_triples(fn)
	with pytest.raises(IOError):
		akg.load_triples(str(tmp_path/'missing.txt'))
	fn = str(tmp_path/'latin1.txt')
	with open(fn, 'wb') as f:
		f.write(b'A\tr\tB\nCaf\xe9\tr\tB\n')
	with pytest.raises(ValueError, match=':2: invalid UTF-8'):
		akg.load_triples(fn)

def test_build_tripleset():
	ts = akg.build_tripleset([('A', 'r', 'B')])
	assert ts.n_entities == 2 and ts.n_relations == 1
	with pytest.raises(ValueError):
		akg.build_tripleset([])
	ts = akg.build_tripleset([('A', 'r', 'B')], valid=[('B', 's', 'C')], test=[('D', 'r', 'A')])
	assert ts.entities == ['A', 'B', 'C', 'D']
	assert ts.relations == ['r', 's']
	with pytest.raises(ValueError):
		ts.train[0,0] = 1

def test_encode_decode():
	train = [('e%d' % i, 'r%d' % (i % 3), 'e%d' % ((i*7) % 11)) for i in range(30)]
	ts = akg.build_tripleset(train)
	for triple in train:
		assert ts.decode(ts.encode(triple)) == triple
	for name in ts.entities:
		assert ts.entities[ts.entity_ids[name]] == name

def test_atpe():
	ts = akg.build_tripleset([('A', 'r', 'B'), ('B', 'r', 'A')], valid=[('A', 's', 'B')], test=[('B', 's', 'A')])
	assert akg.atpe(ts) == 2.0
	rng = np.random.default_rng(1)
	for _ in range(5):
		splits = [[('e%d' % rng.integers(40), 'r%d' % rng.integers(4), 'e%d' % rng.integers(40))
			for _ in range(rng.integers(1, 60))] for _ in range(3)]
		ts = akg.build_tripleset(*splits)
		names = set(n for split in splits for (h, _, t) in split for n in (h, t))
		assert akg.atpe(ts) == sum(len(s) for s in splits)/float(len(names))

def test_atpe_counts_positives_only(tmp_path):
	d = make_dataset(tmp_path/'kg', [('A', 'r', 'B'), ('B', 'r', 'C')],
		[('A', 'r', 'C', '1'), ('C', 'r', 'A', '-1')], [('B', 'r', 'A', '1'), ('C', 'r', 'B', '-1')],
		valid_name='dev.txt')
	ts = akg.read_dataset(d)
	assert ts.valid_labels is not None and ts.test_labels is not None
	stats = akg.dataset_statistics(ts)
	assert (stats['rel'], stats['ent'], stats['train'], stats['valid'], stats['test']) == (1, 3, 2, 1, 1)
	assert stats['atpe'] == pytest.approx(4/3.)

def test_read_dataset_missing_file(tmp_path):
	d = tmp_path/'kg'
	d.mkdir()
	write_lines(d/'train.txt', ['A\tr\tB'])
	write_lines(d/'valid.txt', ['A\tr\tB'])
	with pytest.raises(IOError, match='test.txt'):
		akg.read_dataset(str(d))

def test_relation_stats():
	ts = akg.build_tripleset([('A', 'r', 'B'), ('A', 'r', 'C')])
	st = akg.relation_stats(ts, 'r')
	assert (st.tph, st.hpt, st.category) == (2.0, 1.0, '1-N')
	ts = akg.build_tripleset([('A', 'r', 'B')])
	st = akg.relation_stats(ts, 0)
	assert (st.tph, st.hpt, st.category) == (1.0, 1.0, '1-1')
	ts = akg.build_tripleset([('A', 'r', 'B'), ('C', 'r', 'B'), ('A', 'r', 'D'), ('C', 'r', 'D')])
	st = akg.relation_stats(ts, 'r')
	assert (st.tph, st.hpt, st.category) == (2.0, 2.0, 'N-N')
	ts = akg.build_tripleset([('A', 'r', 'B'), ('C', 'r', 'B')])
	assert akg.relation_stats(ts, 'r').category == 'N-1'
	with pytest.raises(ValueError):
		akg.relation_stats(ts, 'unknown')

def test_category_threshold_is_exact():
	# tph = 3/2 exactly sits on the threshold
	ts = akg.build_tripleset([('A', 'r', 'B'), ('A', 'r', 'C'), ('D', 'r', 'E')])
	st = akg.relation_stats(ts, 'r')
	assert st.tph == 1.5
	assert st.category == '1-N'
	ts = akg.build_tripleset([('A', 's', 'B')], valid=[('A', 'r', 'B')])
	assert akg.relation_categories(ts) == ['1-1', None]

def test_corrupt_unif_small_graph():
	ts = akg.build_tripleset([('A', 'r', 'B'), ('A', 'r', 'A'), ('B', 'r', 'B')], valid=[('C', 'r', 'A')])
	spec = akg.CorruptionSpec('unif', 'either', 0)
	rng  = spec.make_rng()
	seen = set()
	for _ in range(200):
		seen.add(ts.decode(akg.corrupt(ts.encode(('A', 'r', 'B')), spec, ts, rng)))
	assert seen == {('C', 'r', 'B'), ('A', 'r', 'C')}

def test_corrupt_properties():
	rng = np.random.default_rng(3)
	train = [('e%d' % rng.integers(15), 'r%d' % rng.integers(3), 'e%d' % rng.integers(15)) for _ in range(60)]
	ts = akg.build_tripleset(train)
	pos = ts.positives('train')
	for strategy in akg.strategies:
		spec = akg.CorruptionSpec(strategy, 'either', 7)
		neg  = akg.corrupt_batch(np.repeat(pos, 20, axis=0), spec, ts, spec.make_rng())
		assert not ts.is_train_positive(neg).any()
		diff = (neg != np.repeat(pos, 20, axis=0)).sum(axis=1)
		assert np.all(diff == 1)
		assert np.all(neg[:,1] == np.repeat(pos[:,1], 20))
		for triple in pos[:10]:
			out = akg.corrupt(triple, spec, ts, rng)
			assert not ts.is_train_positive(out)[0]
			assert (out != triple).sum() == 1

def test_corrupt_degenerate():
	ts = akg.build_tripleset([('A', 'r', 'A'), ('A', 'r', 'B'), ('B', 'r', 'A'), ('B', 'r', 'B')])
	with pytest.raises(RuntimeError):
		akg.corrupt((0, 0, 1), akg.CorruptionSpec('bern'), ts)

def test_bern_probability_monte_carlo():
	# relation r: one head, nine tails, so tph = 9 and hpt = 1
	train = [('H', 'r', 'T%d' % i) for i in range(9)]
	train += [('F%d' % i, 'filler', 'F%d' % (i+1)) for i in range(1000)]
	ts = akg.build_tripleset(train)
	r  = ts.relation_ids['r']
	spec = akg.CorruptionSpec('bern', 'either', 11)
	assert akg.head_probability(ts, [r], spec)[0] == pytest.approx(0.9)
	pos = np.tile(ts.encode(('H', 'r', 'T0')), (100000, 1))
	neg = akg.corrupt_batch(pos, spec, ts, spec.make_rng())
	freq = np.mean(neg[:,0] != pos[:,0])
	assert abs(freq - 0.9) <= 0.01

def test_bern_symmetric_relation():
	ts = akg.build_tripleset([('A', 'r', 'B'), ('C', 'r', 'D')])
	assert akg.head_probability(ts, [0], akg.CorruptionSpec('bern'))[0] == 0.5
	assert akg.head_probability(ts, [0], akg.CorruptionSpec('unif'))[0] == 0.5
	assert akg.head_probability(ts, [0], akg.CorruptionSpec('bern', 'tail'))[0] == 0.

def test_bern_uses_training_split_only():
	ts1 = akg.build_tripleset([('A', 'r', 'B'), ('A', 'r', 'C')], valid=[('D', 'r', 'B')])
	ts2 = akg.build_tripleset([('A', 'r', 'B'), ('A', 'r', 'C')], valid=[('D', 'r', 'B'), ('E', 'r', 'B')])
	spec = akg.CorruptionSpec('bern')
	assert akg.head_probability(ts1, [0], spec)[0] == akg.head_probability(ts2, [0], spec)[0] == 2/3.

def test_known_positive_index():
	ts = akg.build_tripleset([('A', 'r', 'B')], valid=[('B', 'r', 'C')], test=[('C', 'r', 'A')])
	known = ts.is_known_positive(np.array([ts.encode(t) for t in
		[('A', 'r', 'B'), ('B', 'r', 'C'), ('C', 'r', 'A'), ('A', 'r', 'C')]]))
	assert known.tolist() == [True, True, True, False]
	assert ts.is_train_positive([ts.encode(('B', 'r', 'C'))]).tolist() == [False]
