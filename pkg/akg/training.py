'''
Minimisation of the margin ranking objective by stochastic gradient
descent on the embeddings, alternated with the closed-form solve of the
per-relation weight matrices.
'''

import csv
import time
import warnings
import numpy as np
from scipy import linalg
from joblib import Parallel, delayed
from tqdm import tqdm
from .metric_core import EmbeddingModel, loss_vectors, score_rows, grad_rows, score_triples
from .kg_data import CorruptionSpec, corrupt_batch
from .helper_functions import print_msg, progress_disabled, hash_names
from . import evaluation


def init_model(ts, cfg, rng=None):
	"""
	Random initial embeddings.

	Coordinates are drawn uniformly from [-6/sqrt(k), 6/sqrt(k)] and the
	entity vectors are then scaled to unit length. Weight matrices
	start as the identity, so the first epoch of transA and psd scores
	like transE.

	Parameters
	----------
	ts: TripleSet
	cfg: TrainConfig
	rng: numpy Generator
		If None, one is seeded from cfg.seed.

	Returns
	-------
	EmbeddingModel
	"""
	if rng is None: rng = np.random.default_rng(cfg.seed)
	k = cfg.k
	bound = 6./np.sqrt(k)
	ent = rng.uniform(-bound, bound, size=(ts.n_entities, k))
	rel = rng.uniform(-bound, bound, size=(ts.n_relations, k))
	norms = np.linalg.norm(ent, axis=1, keepdims=True)
	norms[norms == 0] = 1.
	ent /= norms
	return EmbeddingModel(ent, rel, None, variant=cfg.variant,
			entity_hash=hash_names(ts.entities), relation_hash=hash_names(ts.relations))


def hinge_term(pos_score, neg_score, gamma):
	''' max(0, pos_score + gamma - neg_score); works element-wise on arrays. '''
	out = np.maximum(0., np.asarray(pos_score, dtype=np.float64) + gamma - np.asarray(neg_score, dtype=np.float64))
	return float(out) if out.ndim == 0 else out


def _pairs(pos, neg):
	pos = np.asarray(pos, dtype=np.int64).reshape(-1, 3)
	neg = np.asarray(neg, dtype=np.int64).reshape(-1, 3)
	if pos.shape != neg.shape:
		raise ValueError('Need one negative per positive, got %d and %d' % (len(pos), len(neg)))
	return pos, neg


def objective(model, pos, neg, cfg):
	"""
	Margin ranking objective with its two penalties:
	sum of hinge terms + lam * sum ||W_r||_F^2 + C * (sum ||e||^2 + sum ||r||^2).

	Parameters
	----------
	model: EmbeddingModel
	pos, neg: ndarray
		(n,3) positive triples and their paired negatives.
	cfg: TrainConfig

	Returns
	-------
	float
	"""
	pos, neg = _pairs(pos, neg)
	total = 0.
	if pos.shape[0]:
		sp = score_triples(model, pos[:,0], pos[:,1], pos[:,2])
		sn = score_triples(model, neg[:,0], neg[:,1], neg[:,2])
		total += hinge_term(sp, sn, cfg.gamma).sum()
	if model.weight_mats is not None:
		total += cfg.lam*np.sum(model.weight_mats**2)
	total += cfg.C*(np.sum(model.entity_vecs**2) + np.sum(model.relation_vecs**2))
	return float(total)


def _apply(arr, ids, grads, alpha):
	uniq, inv = np.unique(ids, return_inverse=True)
	acc = np.zeros((uniq.size, arr.shape[1]))
	np.add.at(acc, inv.ravel(), grads)
	arr[uniq] -= alpha*acc
	return uniq


def sgd_step(model, pos, neg, cfg, where=''):
	"""
	One gradient step on a minibatch of (positive, negative) pairs.

	Pairs that violate the margin contribute the hinge gradient; every
	entity and relation row touched by the batch also receives the
	penalty gradient 2*C*v. The weight matrices are not changed.

	Parameters
	----------
	model: EmbeddingModel
		Updated in place.
	pos, neg: ndarray
		(n,3) positive triples and their paired negatives.
	cfg: TrainConfig
	where: str
		Location reported if a gradient is not finite.

	Returns
	-------
	(sum of the hinge terms, number of margin-violating pairs)
	"""
	pos, neg = _pairs(pos, neg)
	ent, rel = model.entity_vecs, model.relation_vecs
	ep = loss_vectors(model, pos[:,0], pos[:,1], pos[:,2])
	en = loss_vectors(model, neg[:,0], neg[:,1], neg[:,2])
	margin = score_rows(model, ep, pos[:,1]) + cfg.gamma - score_rows(model, en, neg[:,1])
	viol = margin > 0
	gp = grad_rows(model, ep[viol], pos[viol,1])
	gn = grad_rows(model, en[viol], neg[viol,1])

	ent_ids = [pos[viol,0], pos[viol,2], neg[viol,0], neg[viol,2]]
	ent_g   = [gp, -gp, -gn, gn]
	rel_ids = [pos[viol,1]]
	rel_g   = [gp - gn]
	if cfg.C > 0:
		touched_e = np.unique(np.concatenate([pos[:,0], pos[:,2], neg[:,0], neg[:,2]]))
		touched_r = np.unique(pos[:,1])
		ent_ids.append(touched_e); ent_g.append(2.*cfg.C*ent[touched_e])
		rel_ids.append(touched_r); rel_g.append(2.*cfg.C*rel[touched_r])
	ent_ids, ent_g = np.concatenate(ent_ids), np.concatenate(ent_g)
	rel_ids, rel_g = np.concatenate(rel_ids), np.concatenate(rel_g)

	if not (np.all(np.isfinite(ent_g)) and np.all(np.isfinite(rel_g))):
		raise RuntimeError('Non-finite gradient %s: %d pairs in the batch, violating positives %s, negatives %s'
				% (where, len(pos), pos[viol][:5].tolist(), neg[viol][:5].tolist()))
	if ent_ids.size:
		rows = _apply(ent, ent_ids, ent_g, cfg.alpha)
		if cfg.project_entities:
			norms = np.linalg.norm(ent[rows], axis=1)
			big = norms > 1.
			ent[rows[big]] /= norms[big,None]
	if rel_ids.size:
		_apply(rel, rel_ids, rel_g, cfg.alpha)
	return float(margin[viol].sum()), int(viol.sum())


def _run_batches(model, pos, neg, cfg, starts, epoch):
	hinge, viol = 0., 0
	for b, start in starts:
		sl = slice(start, start + cfg.batch_size)
		h, v = sgd_step(model, pos[sl], neg[sl], cfg, where='in epoch %d, batch %d' % (epoch, b))
		hinge += h
		viol  += v
	return hinge, viol


def sgd_epoch(model, ts, cfg, rng, epoch=0):
	"""
	One pass of minibatch SGD over the shuffled training split.

	Each positive is paired with one negative drawn with the configured
	sampling strategy. The weight matrices stay fixed during the epoch.
	With cfg.workers > 1 the minibatches are shared out to threads that
	update the embeddings without locks; cfg.workers == 1 is deterministic.

	Parameters
	----------
	model: EmbeddingModel
		Updated in place.
	ts: TripleSet
	cfg: TrainConfig
	rng: numpy Generator
	epoch: int
		Epoch number, used in the report row and in error messages.

	Returns
	-------
	dict with epoch, mean_hinge, violations, mean_entity_norm and seconds
	"""
	t1 = time.time()
	train = ts.positives('train')
	pos = train[rng.permutation(train.shape[0])]
	spec = CorruptionSpec(cfg.strategy, 'either', cfg.seed)
	neg = corrupt_batch(pos, spec, ts, rng)
	starts = list(enumerate(range(0, pos.shape[0], cfg.batch_size)))
	if cfg.workers == 1:
		hinge, viol = _run_batches(model, pos, neg, cfg, starts, epoch)
	else:
		shards = [starts[i::cfg.workers] for i in range(cfg.workers)]
		parts = Parallel(n_jobs=cfg.workers, backend='threading')(
			delayed(_run_batches)(model, pos, neg, cfg, shard, epoch) for shard in shards if shard)
		hinge = sum(p[0] for p in parts)
		viol  = sum(p[1] for p in parts)
	row = {'epoch': epoch, 'mean_hinge': hinge/pos.shape[0], 'violations': viol,
		'mean_entity_norm': float(np.linalg.norm(model.entity_vecs, axis=1).mean()),
		'seconds': time.time() - t1}
	if not np.isfinite(row['mean_hinge']) or not np.isfinite(row['mean_entity_norm']):
		raise RuntimeError('Epoch %d produced non-finite values: %s' % (epoch, row))
	return row


def weight_closed_form(model, pos, neg):
	'''
	Signed sum of loss-vector outer products for one relation before
	clipping: -sum over positives + sum over negatives. transA uses the
	absolute loss vectors, psd the signed ones.

	Parameters:
		model (EmbeddingModel): the current embeddings
		pos, neg (ndarray): (n,3) positives of the relation and their sampled negatives

	Returns:
		k x k symmetric matrix
	'''
	pos, neg = _pairs(pos, neg)
	ep = loss_vectors(model, pos[:,0], pos[:,1], pos[:,2])
	en = loss_vectors(model, neg[:,0], neg[:,1], neg[:,2])
	if model.variant == 'transA':
		ep, en = np.abs(ep), np.abs(en)
	M = np.dot(en.T, en) - np.dot(ep.T, ep)
	return 0.5*(M + M.T)


def finish_weight(M, variant, normalize=True):
	'''
	Turn the closed-form matrix into a valid weight matrix.

	transA clips negative entries to zero, psd clips negative
	eigenvalues. With normalize the result is rescaled so that its
	largest entry is 1.

	Returns:
		(W, fallback) where fallback is True if the matrix vanished and
		the identity was returned instead
	'''
	if variant == 'transA':
		W = np.maximum(M, 0.) + 0.
	elif variant == 'psd':
		lam, V = linalg.eigh(M)
		W = np.dot(V*np.clip(lam, 0., None), V.T)
		W = 0.5*(W + W.T)
	else:
		raise ValueError('The %s variant has no weight matrices' % variant)
	scale = np.max(np.abs(W)) if W.size else 0.
	if scale == 0:
		return np.eye(M.shape[0]), True
	if normalize: W = W/scale
	return W, False


def solve_weight_matrix(model, ts, cfg, relation_id, pos=None, neg=None, rng=None,
		normalize=True, report=None):
	"""
	Closed-form weight matrix of one relation, installed in the model.

	Parameters
	----------
	model: EmbeddingModel
		transA or psd model; its matrix for relation_id is replaced.
	ts: TripleSet
	cfg: TrainConfig
	relation_id: int
	pos, neg: ndarray
		Positives of the relation and one sampled negative per positive.
		By default all training triples of the relation and fresh negatives.
	rng: numpy Generator
		Used to sample negatives when neg is None.
	normalize: bool
		Rescale the result so its largest entry is 1 (Default: True).
	report: TrainReport
		If given, identity fallbacks are recorded in report.warnings.

	Returns
	-------
	The k x k weight matrix.
	"""
	if model.weight_mats is None:
		raise ValueError('The %s variant has no weight matrices' % model.variant)
	if pos is None:
		train = ts.positives('train')
		pos = train[train[:,1] == relation_id]
	if len(pos) == 0:
		raise ValueError('Relation %s has no training triples' % relation_id)
	if neg is None:
		if rng is None: rng = np.random.default_rng(cfg.seed)
		neg = corrupt_batch(pos, CorruptionSpec(cfg.strategy, 'either', cfg.seed), ts, rng)
	W, fallback = finish_weight(weight_closed_form(model, pos, neg), model.variant, normalize)
	if fallback:
		msg = 'Weight matrix of relation %s vanished after clipping; using the identity' % relation_id
		warnings.warn(msg)
		if report is not None: report.warnings.append(msg)
	model.weight_mats[relation_id] = W
	return W


def update_weights(model, ts, cfg, rng, report=None):
	'''
	Solve the weight matrices of every training relation with freshly
	sampled negatives. Relations are solved in parallel when
	cfg.workers > 1.
	'''
	train = ts.positives('train')
	neg = corrupt_batch(train, CorruptionSpec(cfg.strategy, 'either', cfg.seed), ts, rng)
	order = np.argsort(train[:,1], kind='stable')
	bounds = np.searchsorted(train[order,1], np.arange(ts.n_relations + 1))
	jobs = [(r, order[bounds[r]:bounds[r+1]]) for r in range(ts.n_relations) if bounds[r+1] > bounds[r]]
	def solve(r, idx):
		return solve_weight_matrix(model, ts, cfg, r, pos=train[idx], neg=neg[idx], report=report)
	if cfg.workers == 1:
		for r, idx in jobs: solve(r, idx)
	else:
		Parallel(n_jobs=cfg.workers, backend='threading')(delayed(solve)(r, idx) for r, idx in jobs)


class TrainReport:
	'''
	Per-epoch training record.

	Attributes:
		config (dict): the configuration used
		rows (list): one dict per epoch with the entries of TrainReport.columns
		warnings (list): identity fallbacks and other recorded anomalies
		best_epoch (int or None): epoch of the returned model
		best_metric (float or None): its validation metric
		stopped_early (bool): whether training stopped on patience
	'''
	columns = ('epoch', 'mean_hinge', 'violations', 'mean_entity_norm', 'seconds', 'valid_metric')

	def __init__(self, cfg=None):
		self.config   = {} if cfg is None else cfg.as_dict()
		self.rows     = []
		self.warnings = []
		self.best_epoch  = None
		self.best_metric = None
		self.stopped_early = False

	def add(self, row):
		self.rows.append(row)

	def column(self, name):
		return np.array([row.get(name) for row in self.rows], dtype=float)

	def write(self, filename):
		''' Write the rows as a comma-separated table with a header. '''
		with open(filename, 'w', newline='', encoding='utf-8') as f:
			writer = csv.writer(f)
			writer.writerow(self.columns)
			for row in self.rows:
				writer.writerow(['' if row.get(c) is None else row.get(c) for c in self.columns])


def resolve_mode(ts, cfg):
	''' 'class' when the validation split is labelled and the mode is auto. '''
	if cfg.mode != 'auto': return cfg.mode
	return 'class' if ts.valid_labels is not None else 'link'


def validate(model, ts, cfg, mode, triples=None):
	'''
	Validation metric: filtered HITS@10 in link mode, accuracy with
	thresholds tuned on the validation split in class mode.
	'''
	if mode == 'class':
		if ts.valid_labels is None:
			raise ValueError('classification labels required')
		thr = evaluation.tune_thresholds(model, ts.valid, ts.valid_labels)
		return evaluation.classify(model, thr, ts.valid, ts.valid_labels)
	if triples is None: triples = ts.positives('valid')
	rr = evaluation.link_prediction(model, ts, triples=triples, workers=cfg.workers)
	return rr.hits_at_10['filtered']


def train(ts, cfg, on_improve=None):
	"""
	Train a model, alternating SGD epochs with weight-matrix solves.

	transA and psd recompute every weight matrix each cfg.w_update_period
	epochs; transE skips that step. Every cfg.validation_period epochs
	the model is validated and the best one is kept; training stops after
	cfg.patience rounds without improvement.

	Parameters
	----------
	ts: TripleSet
	cfg: TrainConfig
	on_improve: callable
		Called as on_improve(model, epoch, metric) on every validation improvement.

	Returns
	-------
	(EmbeddingModel, TrainReport)
	"""
	cfg = cfg.copy().check()
	rng = np.random.default_rng(cfg.seed)
	model  = init_model(ts, cfg, rng)
	mode   = resolve_mode(ts, cfg)
	report = TrainReport(cfg)
	print_msg('Training %s: k=%d, alpha=%g, gamma=%g, C=%g, %s sampling, %s validation'
			% (cfg.variant, cfg.k, cfg.alpha, cfg.gamma, cfg.C, cfg.strategy, mode))

	valid = None
	if mode == 'link':
		valid = ts.positives('valid')
		if cfg.valid_sample and cfg.valid_sample < valid.shape[0]:
			pick = np.random.default_rng(cfg.seed).choice(valid.shape[0], cfg.valid_sample, replace=False)
			valid = valid[np.sort(pick)]
	has_valid = ts.valid.shape[0] > 0

	best, rounds = None, 0
	bar = tqdm(range(1, cfg.epochs + 1), disable=progress_disabled())
	for epoch in bar:
		row = sgd_epoch(model, ts, cfg, rng, epoch)
		if model.variant != 'transE' and epoch % cfg.w_update_period == 0:
			update_weights(model, ts, cfg, rng, report)
		row['valid_metric'] = None
		if has_valid and (epoch % cfg.validation_period == 0 or epoch == cfg.epochs):
			metric = validate(model, ts, cfg, mode, triples=valid)
			row['valid_metric'] = metric
			if report.best_metric is None or metric > report.best_metric:
				best = model.copy()
				report.best_metric, report.best_epoch = metric, epoch
				rounds = 0
				if on_improve is not None: on_improve(best, epoch, metric)
			else:
				rounds += 1
		report.add(row)
		bar.set_postfix(loss='%.4f' % row['mean_hinge'], viol=row['violations'])
		if rounds >= cfg.patience:
			print_msg('No validation improvement in %d rounds, stopping at epoch %d' % (rounds, epoch))
			report.stopped_early = True
			break
	bar.close()
	if best is None:
		best = model
		report.best_epoch = len(report.rows)
	print_msg('Best model from epoch %s (validation %s)' % (report.best_epoch, report.best_metric))
	return best, report
