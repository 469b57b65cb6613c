'''
Link prediction (raw and filtered ranks, Mean Rank, HITS@10, breakdown by
relation category) and triple classification with per-relation thresholds.
'''

import csv
import numpy as np
import warnings
from joblib import Parallel, delayed
from tqdm import tqdm
from .metric_core import score_candidates, score_triples
from .kg_data import relation_categories, categories
from .helper_functions import print_msg, progress_disabled
from .usefuls import loading_msg, loading_done

slots = ('head', 'tail')


def _ranks(model, triple, slot, ts):
	h, r, t = [int(x) for x in triple]
	scores = score_candidates(model, h, r, t, slot)
	true = t if slot == 'tail' else h
	smaller = np.flatnonzero(scores < scores[true])
	raw = 1 + smaller.size
	cands = np.empty((smaller.size, 3), dtype=np.int64)
	cands[:,0] = smaller if slot == 'head' else h
	cands[:,1] = r
	cands[:,2] = smaller if slot == 'tail' else t
	filtered = raw - int(ts.is_known_positive(cands).sum())
	return raw, filtered


def rank_entity(model, triple, slot, filtered, ts):
	"""
	Rank of the true entity among all completions of one slot.

	Every entity is placed in the slot and scored; the rank is one plus
	the number of candidates scoring strictly lower than the true entity.
	In the filtered setting candidates forming a known positive triple
	(train, valid or test) are not counted.

	Parameters
	----------
	model: EmbeddingModel
	triple: sequence of three ints
		(head, relation, tail) ids of the test triple.
	slot: str
		'head' or 'tail'.
	filtered: bool
		Filtered (True) or raw (False) setting.
	ts: TripleSet

	Returns
	-------
	int
	"""
	if slot not in slots:
		raise ValueError('Unknown slot: %s' % slot)
	raw, filt = _ranks(model, triple, slot, ts)
	return filt if filtered else raw


class RankReport:
	'''
	Ranks of a set of test triples and their aggregates.

	Attributes:
		triples (ndarray): (n,3) test triples
		head_raw, head_filtered, tail_raw, tail_filtered (ndarray): per-triple ranks
		mean_rank (dict): {'raw': float, 'filtered': float} over both slots
		hits_at_10 (dict): {'raw': float, 'filtered': float} in percent over both slots
		per_category (dict): {'raw'|'filtered': {category: {'head': float, 'tail': float}}},
			HITS@10 in percent; None where a category has no test triples
	'''
	def __init__(self, triples, head_raw, head_filtered, tail_raw, tail_filtered, relation_category=None):
		self.triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
		self.head_raw = np.asarray(head_raw, dtype=np.int64)
		self.head_filtered = np.asarray(head_filtered, dtype=np.int64)
		self.tail_raw = np.asarray(tail_raw, dtype=np.int64)
		self.tail_filtered = np.asarray(tail_filtered, dtype=np.int64)
		self.mean_rank, self.hits_at_10 = {}, {}
		for setting in ('raw', 'filtered'):
			both = np.concatenate([getattr(self, 'head_'+setting), getattr(self, 'tail_'+setting)])
			self.mean_rank[setting]  = float(both.mean()) if both.size else float('nan')
			self.hits_at_10[setting] = hits_at(both, 10)
		self.per_category = {'raw': {}, 'filtered': {}}
		if relation_category is not None:
			cats = np.array([relation_category[r] for r in self.triples[:,1]], dtype=object)
			for setting in ('raw', 'filtered'):
				for cat in categories:
					sel = cats == cat
					self.per_category[setting][cat] = {
						'head': hits_at(getattr(self, 'head_'+setting)[sel], 10) if sel.any() else None,
						'tail': hits_at(getattr(self, 'tail_'+setting)[sel], 10) if sel.any() else None}

	def __len__(self):
		return self.triples.shape[0]

	def summary(self):
		return ('Mean Rank raw %.1f, filtered %.1f | HITS@10 raw %.1f%%, filtered %.1f%%'
			% (self.mean_rank['raw'], self.mean_rank['filtered'],
			self.hits_at_10['raw'], self.hits_at_10['filtered']))

	def table_rows(self, filtered_only=False):
		''' Rows of (setting, mean_rank, hits_at_10). '''
		settings = ('filtered',) if filtered_only else ('raw', 'filtered')
		return [(s, self.mean_rank[s], self.hits_at_10[s]) for s in settings]

	def category_rows(self, setting='filtered'):
		''' Rows of (task, 1-1, 1-N, N-1, N-N) with HITS@10 per category. '''
		rows = []
		for slot in slots:
			cells = [self.per_category[setting].get(cat, {}).get(slot) for cat in categories]
			rows.append(['predict_'+slot] + ['' if c is None else c for c in cells])
		return rows


def hits_at(ranks, n=10):
	''' Percentage of ranks not larger than n. '''
	ranks = np.asarray(ranks)
	if ranks.size == 0: return float('nan')
	return 100.*np.count_nonzero(ranks <= n)/ranks.size


def _rank_chunk(model, triples, ts):
	out = np.empty((triples.shape[0], 4), dtype=np.int64)
	for i, triple in enumerate(triples):
		out[i,0:2] = _ranks(model, triple, 'head', ts)
		out[i,2:4] = _ranks(model, triple, 'tail', ts)
	return out


def link_prediction(model, ts, triples=None, workers=1, chunk_size=200):
	"""
	Rank both slots of every test triple.

	Parameters
	----------
	model: EmbeddingModel
	ts: TripleSet
	triples: ndarray
		Triples to rank (Default: the positive test triples).
	workers: int
		Number of threads. The result does not depend on it.
	chunk_size: int
		Triples per work unit.

	Returns
	-------
	RankReport
	"""
	if triples is None: triples = ts.positives('test')
	triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
	if triples.shape[0] == 0:
		raise ValueError('No triples to rank')
	chunks = [triples[i:i+chunk_size] for i in range(0, triples.shape[0], chunk_size)]
	if workers > 1:
		parts = Parallel(n_jobs=workers, backend='threading')(
			delayed(_rank_chunk)(model, c, ts) for c in tqdm(chunks, disable=progress_disabled()))
	else:
		parts, done = [], 0
		for c in chunks:
			parts.append(_rank_chunk(model, c, ts))
			done += c.shape[0]
			loading_msg(done, triples.shape[0], 'triples ranked')
		loading_done()
	ranks = np.concatenate(parts)
	report = RankReport(triples, ranks[:,0], ranks[:,1], ranks[:,2], ranks[:,3],
			relation_category=relation_categories(ts))
	print_msg(report.summary())
	return report


class ClassifierThresholds:
	'''
	Decision thresholds for triple classification.

	Attributes:
		sigma (dict): relation id -> threshold in score units
		fallback (float): threshold tuned on all validation triples pooled
		unseen (list): relation ids without validation triples (they use the fallback)
	'''
	def __init__(self, sigma, fallback, unseen=()):
		self.sigma    = dict(sigma)
		self.fallback = float(fallback)
		self.unseen   = list(unseen)

	def threshold(self, relation_id):
		return self.sigma.get(int(relation_id), self.fallback)

	def thresholds(self, relation_ids):
		return np.array([self.threshold(r) for r in relation_ids], dtype=np.float64)


def best_threshold(scores, labels):
	'''
	Threshold maximising accuracy of the rule "positive iff score < sigma".

	Candidates are the midpoints between consecutive distinct scores plus
	one value below the minimum and one above the maximum; ties go to
	the smaller threshold.

	Parameters:
		scores (ndarray): scores of the labelled triples
		labels (ndarray): True for positives

	Returns:
		(sigma, accuracy as a fraction)
	'''
	scores = np.asarray(scores, dtype=np.float64)
	labels = np.asarray(labels, dtype=bool)
	if scores.size == 0:
		raise ValueError('Cannot tune a threshold without triples')
	values = np.unique(scores)
	cand = np.concatenate([[values[0] - 1.], 0.5*(values[:-1] + values[1:]), [values[-1] + 1.]])
	# correct(c) = #positives below c + #negatives at or above c
	pos_sorted = np.sort(scores[labels])
	neg_sorted = np.sort(scores[~labels])
	pos_below = np.searchsorted(pos_sorted, cand, side='left')
	neg_above = neg_sorted.size - np.searchsorted(neg_sorted, cand, side='left')
	acc = (pos_below + neg_above)/float(scores.size)
	best = int(np.argmax(acc))
	return float(cand[best]), float(acc[best])


def tune_thresholds(model, triples, labels):
	"""
	Per-relation thresholds tuned on a labelled validation split.

	Parameters
	----------
	model: EmbeddingModel
	triples: ndarray
		(n,3) validation triples.
	labels: ndarray
		True for positives.

	Returns
	-------
	ClassifierThresholds
	"""
	if labels is None:
		raise ValueError('classification labels required')
	triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
	labels  = np.asarray(labels, dtype=bool)
	scores  = score_triples(model, triples[:,0], triples[:,1], triples[:,2])
	fallback, _ = best_threshold(scores, labels)
	sigma = {}
	for r in np.unique(triples[:,1]):
		sel = triples[:,1] == r
		sigma[int(r)], _ = best_threshold(scores[sel], labels[sel])
	unseen = [r for r in range(model.n_relations) if r not in sigma]
	if unseen:
		warnings.warn('%d relations have no validation triples and use the pooled threshold' % len(unseen))
	return ClassifierThresholds(sigma, fallback, unseen)


def predict(model, thresholds, triples):
	''' True where a triple is classified as positive. '''
	triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
	scores = score_triples(model, triples[:,0], triples[:,1], triples[:,2])
	return scores < thresholds.thresholds(triples[:,1])


def classify(model, thresholds, triples, labels):
	"""
	Accuracy of the threshold rule on a labelled split.

	Parameters
	----------
	model: EmbeddingModel
	thresholds: ClassifierThresholds
	triples: ndarray
		(n,3) triples.
	labels: ndarray
		True for positives.

	Returns
	-------
	Accuracy in percent.
	"""
	if labels is None:
		raise ValueError('classification labels required')
	labels = np.asarray(labels, dtype=bool)
	if labels.size == 0:
		raise ValueError('No triples to classify')
	return 100.*np.mean(predict(model, thresholds, triples) == labels)


def classify_per_relation(model, thresholds, triples, labels):
	'''
	Accuracy in percent for each relation present in the split.

	Returns:
		dict relation id -> accuracy
	'''
	if labels is None:
		raise ValueError('classification labels required')
	triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
	correct = predict(model, thresholds, triples) == np.asarray(labels, dtype=bool)
	return {int(r): 100.*correct[triples[:,1] == r].mean() for r in np.unique(triples[:,1])}


def write_rank_report(report, filename, filtered_only=False):
	'''
	Write the Mean Rank / HITS@10 table of a link-prediction run.
	Columns: setting, mean_rank, hits_at_10.
	'''
	with open(filename, 'w', newline='', encoding='utf-8') as f:
		writer = csv.writer(f)
		writer.writerow(('setting', 'mean_rank', 'hits_at_10'))
		for row in report.table_rows(filtered_only): writer.writerow(row)
	print_msg('Link prediction table written to %s' % filename)


def write_category_table(report, filename, setting='filtered'):
	'''
	Write HITS@10 by relation category, one row for head and one for
	tail prediction. Empty cells mark categories without test triples.
	'''
	with open(filename, 'w', newline='', encoding='utf-8') as f:
		writer = csv.writer(f)
		writer.writerow(('task',) + categories)
		for row in report.category_rows(setting): writer.writerow(row)


def write_ranks(report, filename, ts=None):
	''' Per-triple raw and filtered ranks of both slots. '''
	with open(filename, 'w', newline='', encoding='utf-8') as f:
		writer = csv.writer(f)
		writer.writerow(('head', 'relation', 'tail', 'head_raw', 'head_filtered', 'tail_raw', 'tail_filtered'))
		for i, triple in enumerate(report.triples):
			names = ts.decode(triple) if ts is not None else tuple(int(x) for x in triple)
			writer.writerow(names + (report.head_raw[i], report.head_filtered[i],
				report.tail_raw[i], report.tail_filtered[i]))


def write_classification(filename, accuracy, per_relation=None, ts=None):
	'''
	Write the classification accuracy, overall and per relation.
	Columns: relation, accuracy; the overall row is named "all".
	'''
	with open(filename, 'w', newline='', encoding='utf-8') as f:
		writer = csv.writer(f)
		writer.writerow(('relation', 'accuracy'))
		writer.writerow(('all', accuracy))
		for r, acc in sorted((per_relation or {}).items()):
			writer.writerow((ts.relations[r] if ts is not None else r, acc))
	print_msg('Classification table written to %s' % filename)
