import numpy as np
import pytest
import adaptivekg as akg

akg.set_verbose(False)


def synthetic_kg(seed):
	rng   = np.random.default_rng(seed)
	n_ent = int(rng.integers(5, 51))
	n_rel = int(rng.integers(1, 6))
	def triples(n):
		return [('e%d' % rng.integers(n_ent), 'r%d' % rng.integers(n_rel), 'e%d' % rng.integers(n_ent))
			for _ in range(n)]
	ts = akg.build_tripleset(triples(3*n_ent), valid=triples(n_ent), test=triples(n_ent))
	variant = akg.variants[seed % 3]
	k = int(rng.integers(1, 6))
	W = np.array([np.dot(B.T, B) for B in rng.uniform(0, 1, size=(ts.n_relations, k, k))])
	model = akg.EmbeddingModel(rng.normal(size=(ts.n_entities, k)), rng.normal(size=(ts.n_relations, k)),
		W, variant=variant)
	return ts, model

def scalar_score(model, h, r, t):
	args = (model.entity_vecs[h], model.relation_vecs[r], model.entity_vecs[t])
	if model.variant == 'transE': return akg.score_transe(*args)
	if model.variant == 'transA': return akg.score_transa(*args, model.weight(r))
	return akg.score_psd(*args, model.weight(r))

def oracle_ranks(model, ts, triple, slot):
	''' Brute force: score every completion, count the strictly better ones. '''
	h, r, t = [int(x) for x in triple]
	known = set(tuple(int(x) for x in row) for s in ('train', 'valid', 'test') for row in ts.positives(s))
	cands = []
	for e in range(ts.n_entities):
		c = (e, r, t) if slot == 'head' else (h, r, e)
		cands.append((scalar_score(model, *c), c))
	true = scalar_score(model, h, r, t)
	raw  = 1 + sum(1 for s, c in cands if s < true)
	filt = 1 + sum(1 for s, c in cands if s < true and c not in known)
	return raw, filt

def line_model(n):
	''' Entities on a line, one relation stepping to the next entity. '''
	ts = akg.build_tripleset([('e%d' % i, 'next', 'e%d' % (i+1)) for i in range(n-1)],
		test=[('e%d' % i, 'next', 'e%d' % (i+1)) for i in range(n-1)])
	model = akg.EmbeddingModel(10.*np.arange(n)[:,None], [[10.]], variant='transE')
	return ts, model


def test_rank_unique_minimum():
	ts, model = line_model(6)
	for triple in ts.test:
		for slot in akg.slots:
			assert akg.rank_entity(model, triple, slot, False, ts) == 1
			assert akg.rank_entity(model, triple, slot, True, ts) == 1
	with pytest.raises(ValueError):
		akg.rank_entity(model, ts.test[0], 'relation', True, ts)

def test_perfect_model_report():
	ts, model = line_model(8)
	rr = akg.link_prediction(model, ts)
	assert rr.mean_rank == {'raw': 1., 'filtered': 1.}
	assert rr.hits_at_10 == {'raw': 100., 'filtered': 100.}
	assert rr.per_category['filtered']['1-1'] == {'head': 100., 'tail': 100.}
	assert rr.per_category['filtered']['N-N'] == {'head': None, 'tail': None}

def test_ranks_match_brute_force():
	for seed in range(6):
		ts, model = synthetic_kg(seed)
		rr = akg.link_prediction(model, ts)
		for i, triple in enumerate(ts.test):
			head = oracle_ranks(model, ts, triple, 'head')
			tail = oracle_ranks(model, ts, triple, 'tail')
			assert (rr.head_raw[i], rr.head_filtered[i]) == head
			assert (rr.tail_raw[i], rr.tail_filtered[i]) == tail
			assert akg.rank_entity(model, triple, 'tail', True, ts) == tail[1]
		assert np.all(rr.head_filtered <= rr.head_raw) and np.all(rr.tail_filtered <= rr.tail_raw)
		assert np.all(rr.head_filtered >= 1) and np.all(rr.tail_raw <= ts.n_entities)
		for setting in ('raw', 'filtered'):
			ranks = np.concatenate([getattr(rr, 'head_'+setting), getattr(rr, 'tail_'+setting)])
			assert rr.mean_rank[setting] == ranks.mean()
			assert rr.hits_at_10[setting] == 100.*np.count_nonzero(ranks <= 10)/ranks.size

def test_link_prediction_workers_and_determinism():
	ts, model = synthetic_kg(7)
	r1 = akg.link_prediction(model, ts, workers=1, chunk_size=3)
	r2 = akg.link_prediction(model, ts, workers=3, chunk_size=3)
	r3 = akg.link_prediction(model, ts)
	for name in ('head_raw', 'head_filtered', 'tail_raw', 'tail_filtered'):
		assert np.array_equal(getattr(r1, name), getattr(r2, name))
		assert np.array_equal(getattr(r1, name), getattr(r3, name))
	assert r1.mean_rank == r2.mean_rank

def test_best_threshold():
	assert akg.best_threshold([1, 2, 5, 6], [True, True, False, False]) == (3.5, 1.0)
	sigma, acc = akg.best_threshold([1, 2, 3], [True, True, True])
	assert sigma > 3 and acc == 1.0
	assert akg.best_threshold([1, 4, 2, 5], [True, True, False, False]) == (1.5, 0.75)
	with pytest.raises(ValueError):
		akg.best_threshold([], [])

def labelled_split(ts, model, rng, n):
	pos = ts.train[rng.integers(ts.train.shape[0], size=n)]
	neg = akg.corrupt_batch(pos, akg.CorruptionSpec('unif'), ts, rng)
	return np.concatenate([pos, neg]), np.concatenate([np.ones(n, bool), np.zeros(n, bool)])

def test_tune_thresholds_optimal_per_relation():
	rng = np.random.default_rng(3)
	ts, model = synthetic_kg(4)
	triples, labels = labelled_split(ts, model, rng, 40)
	thr = akg.tune_thresholds(model, triples, labels)
	scores = akg.score_triples(model, triples[:,0], triples[:,1], triples[:,2])
	for r, sigma in thr.sigma.items():
		sel = triples[:,1] == r
		acc = np.mean((scores[sel] < sigma) == labels[sel])
		for c in np.concatenate([scores[sel] - 1e-9, scores[sel] + 1e-9]):
			assert acc >= np.mean((scores[sel] < c) == labels[sel])
	pooled = akg.best_threshold(scores, labels)[1]
	assert akg.classify(model, thr, triples, labels) >= 100.*pooled - 1e-9

def test_tune_thresholds_unseen_relation():
	ts  = akg.build_tripleset([('A', 'r', 'B'), ('B', 's', 'C')])
	model = akg.EmbeddingModel([[0.], [1.], [3.]], [[1.], [1.]], variant='transE')
	triples = np.array([[0, 0, 1], [0, 0, 2]])
	with pytest.warns(UserWarning, match='no validation triples'):
		thr = akg.tune_thresholds(model, triples, [True, False])
	assert thr.unseen == [1]
	assert thr.threshold(1) == thr.fallback
	assert akg.classify(model, thr, triples, [True, False]) == 100.

def test_classify():
	ts, model = synthetic_kg(5)
	triples = ts.test
	labels  = np.arange(len(triples)) % 3 == 0
	thr = akg.ClassifierThresholds({}, np.inf)
	assert akg.classify(model, thr, triples, labels) == pytest.approx(100.*labels.mean())
	with pytest.raises(ValueError, match='classification labels required'):
		akg.classify(model, thr, triples, None)
	with pytest.raises(ValueError, match='classification labels required'):
		akg.tune_thresholds(model, triples, None)
	per_rel = akg.classify_per_relation(model, thr, triples, labels)
	assert set(per_rel) == set(np.unique(triples[:,1]).tolist())

def test_report_tables(tmp_path):
	ts, model = line_model(5)
	rr = akg.link_prediction(model, ts)
	fn = str(tmp_path/'link.csv')
	akg.write_rank_report(rr, fn, filtered_only=True)
	with open(fn) as f:
		lines = f.read().splitlines()
	assert lines[0] == 'setting,mean_rank,hits_at_10'
	assert lines[1] == 'filtered,1.0,100.0'
	fn = str(tmp_path/'cat.csv')
	akg.write_category_table(rr, fn)
	with open(fn) as f:
		lines = f.read().splitlines()
	assert lines[0] == 'task,1-1,1-N,N-1,N-N'
	assert lines[1] == 'predict_head,100.0,,,'
	fn = str(tmp_path/'ranks.csv')
	akg.write_ranks(rr, fn, ts)
	with open(fn) as f:
		assert len(f.read().splitlines()) == len(ts.test) + 1
