'''
Diagnostics of learned metrics: LDL factorisation of the weight matrices,
the weight-difference statistic per relation and PCA coordinates of
embeddings for plotting.
'''

import csv
import warnings
import numpy as np
from joblib import Parallel, delayed
from sklearn.decomposition import PCA
from .metric_core import score_candidates
from .helper_functions import print_msg

pivot_tol  = 1e-10
median_tol = 1e-12
zero_tol   = 1e-12


class LDLFactors:
	'''
	Factors of W = L^T D L.

	Attributes:
		L (ndarray): k x k unit lower-triangular matrix
		D (ndarray): the k diagonal weights
		perturbed (bool): True if a pivot was regularised, in which case the
			reconstruction differs from the input
		perturbed_pivots (list): indices of the regularised pivots
	'''
	def __init__(self, L, D, perturbed_pivots=()):
		self.L = L
		self.D = D
		self.perturbed_pivots = list(perturbed_pivots)
		self.perturbed = len(self.perturbed_pivots) > 0

	def reconstruct(self):
		return np.dot(self.L.T*self.D, self.L)


def _ldl_lower(A):
	# unpivoted A = L diag(d) L^T
	n = A.shape[0]
	L = np.eye(n)
	d = np.zeros(n)
	bad = []
	for j in range(n):
		ld = L[j,:j]*d[:j]
		d[j] = A[j,j] - np.dot(L[j,:j], ld)
		if abs(d[j]) < pivot_tol:
			d[j] += np.copysign(pivot_tol, d[j]) if d[j] != 0 else pivot_tol
			bad.append(j)
		L[j+1:,j] = (A[j+1:,j] - np.dot(L[j+1:,:j], ld))/d[j]
	return L, d, bad


def ldl_decompose(W):
	"""
	Factor a symmetric matrix as W = L^T D L with L unit lower triangular.

	The factorisation runs without pivoting, from the last row upwards.
	A pivot smaller than 1e-10 in magnitude is pushed away from zero by
	1e-10 and the result is flagged as perturbed.

	Parameters
	----------
	W: ndarray
		k x k symmetric matrix.

	Returns
	-------
	LDLFactors
	"""
	W = np.asarray(W, dtype=np.float64)
	if W.ndim != 2 or W.shape[0] != W.shape[1]:
		raise ValueError('Expected a square matrix, got shape %s' % (W.shape,))
	if not np.allclose(W, W.T, rtol=0, atol=1e-12*max(1., np.abs(W).max(initial=0.))):
		raise ValueError('LDL decomposition needs a symmetric matrix')
	n = W.shape[0]
	Lr, dr, bad = _ldl_lower(W[::-1,::-1])
	L = Lr[::-1,::-1].T.copy()
	D = dr[::-1].copy()
	bad = sorted(n - 1 - j for j in bad)
	if bad:
		warnings.warn('LDL pivots %s were below %g and have been perturbed' % (bad, pivot_tol))
	return LDLFactors(L, D, bad)


def weight_difference(factors):
	'''
	(max(D) - median(D))/median(D) of the LDL weights.

	Parameters:
		factors (LDLFactors or array): the factors, or the weights D directly

	Returns:
		float, nan when the median is not above 1e-12
	'''
	D = factors.D if isinstance(factors, LDLFactors) else np.asarray(factors, dtype=np.float64)
	med = np.median(D)
	if med <= median_tol: return float('nan')
	return float((D.max() - med)/med)


def pca_project(vectors, dims=2):
	"""
	Project vectors onto their leading principal directions.

	The vectors are centred; each principal direction is oriented so that
	its largest-magnitude coordinate is positive. Directions with no
	variance give zero coordinates.

	Parameters
	----------
	vectors: ndarray
		(n, k) array, n >= 2.
	dims: int
		Number of output coordinates (Default: 2).

	Returns
	-------
	(n, dims) ndarray of coordinates.
	"""
	X = np.asarray(vectors, dtype=np.float64)
	if X.ndim != 2 or X.shape[0] < 2:
		raise ValueError('PCA needs at least 2 vectors, got shape %s' % (X.shape,))
	out = np.zeros((X.shape[0], dims))
	Xc = X - X.mean(axis=0)
	if np.abs(Xc).max() <= zero_tol*max(1., np.abs(X).max()):
		warnings.warn('The vectors have zero variance; all coordinates are zero')
		return out
	n_comp = min(dims, X.shape[0], X.shape[1])
	pca = PCA(n_components=n_comp, svd_solver='full')
	pca.fit(X)
	comps = pca.components_.copy()
	for i, c in enumerate(comps):
		if c[np.argmax(np.abs(c))] < 0: comps[i] = -c
	out[:,:n_comp] = np.dot(Xc, comps.T)
	return out


def export_pca(model, ts, relation, head=None, n_unmatched=50):
	"""
	Plot data for one relation: the translated head h + r, the true tails
	of the head and its closest wrong tails, projected to 2-D.

	Parameters
	----------
	model: EmbeddingModel
	ts: TripleSet
	relation: str or int
		Relation name or id.
	head: str
		Head entity name. By default the head with most training tails
		under the relation.
	n_unmatched: int
		Number of best-scoring wrong tails to include.

	Returns
	-------
	list of (name, tag, x, y) rows; tag is 'center', 'matched' or 'unmatched'
	"""
	if isinstance(relation, str) and relation not in ts.relation_ids:
		raise ValueError('Unknown relation: %s' % relation)
	r = ts.relation_ids[relation] if isinstance(relation, str) else int(relation)
	train = ts.positives('train')
	rows = train[train[:,1] == r]
	if rows.shape[0] == 0:
		raise ValueError('Relation %s has no training triples' % relation)
	if head is None:
		heads, counts = np.unique(rows[:,0], return_counts=True)
		h = int(heads[np.argmax(counts)])
	else:
		if head not in ts.entity_ids: raise ValueError('Unknown entity: %s' % head)
		h = ts.entity_ids[head]
	matched = np.unique(rows[rows[:,0] == h, 2])
	scores = score_candidates(model, h, r, 0, 'tail')
	scores[matched] = np.inf
	scores[h] = np.inf
	order = np.argsort(scores, kind='stable')
	unmatched = order[:min(n_unmatched, np.count_nonzero(np.isfinite(scores)))]

	center = model.entity_vecs[h] + model.relation_vecs[r]
	vecs = np.vstack([center[None], model.entity_vecs[matched], model.entity_vecs[unmatched]])
	coords = pca_project(vecs, 2)
	names = ['%s+%s' % (ts.entities[h], ts.relations[r])] + [ts.entities[e] for e in matched] \
		+ [ts.entities[e] for e in unmatched]
	tags = ['center'] + ['matched']*matched.size + ['unmatched']*unmatched.size
	print_msg('PCA of %d vectors for relation %s, head %s' % (vecs.shape[0], ts.relations[r], ts.entities[h]))
	return [(n, t, x, y) for n, t, (x, y) in zip(names, tags, coords)]


def _relation_row(model, r):
	factors = ldl_decompose(model.weight(r))
	return weight_difference(factors), factors.perturbed


def weight_table(model, ts=None, accuracy=None, workers=1):
	'''
	Weight difference of every relation, paired with its classification
	accuracy when available.

	Parameters:
		* model (EmbeddingModel): the trained model
		* ts = None (TripleSet): used for relation names
		* accuracy = None (dict): relation id -> accuracy in percent
		* workers = 1 (int): number of threads

	Returns:
		list of dicts with keys relation, weight_difference, flagged, accuracy
	'''
	if workers > 1:
		results = Parallel(n_jobs=workers, backend='threading')(
			delayed(_relation_row)(model, r) for r in range(model.n_relations))
	else:
		results = [_relation_row(model, r) for r in range(model.n_relations)]
	table = []
	for r, (wd, flagged) in enumerate(results):
		table.append({'relation': ts.relations[r] if ts is not None else r,
			'weight_difference': wd, 'flagged': flagged,
			'accuracy': None if accuracy is None else accuracy.get(r)})
	return table


def write_weight_table(table, filename):
	''' Comma-separated weight table; missing values are empty cells. '''
	cols = ('relation', 'weight_difference', 'flagged', 'accuracy')
	with open(filename, 'w', newline='', encoding='utf-8') as f:
		writer = csv.writer(f)
		writer.writerow(cols)
		for row in table:
			cells = []
			for c in cols:
				v = row[c]
				if v is None or (isinstance(v, float) and np.isnan(v)): v = ''
				cells.append(v)
			writer.writerow(cells)
	print_msg('Weight table written to %s' % filename)


def write_pca(rows, filename):
	''' Comma-separated PCA coordinates: name, tag, x, y. '''
	with open(filename, 'w', newline='', encoding='utf-8') as f:
		writer = csv.writer(f)
		writer.writerow(('name', 'tag', 'x', 'y'))
		for row in rows: writer.writerow(row)
	print_msg('PCA coordinates written to %s' % filename)
