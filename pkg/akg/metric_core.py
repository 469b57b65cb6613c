'''
Embedding model and the score functions of the translation models:
the Euclidean score, the adaptive metric over the absolute loss vector
and its PSD-quadratic ablation, together with their gradients.
'''

import numpy as np
from scipy import linalg
from .helper_functions import as_vector

variants = ('transE', 'transA', 'psd')
max_dim  = 1024
symmetry_tol = 1e-12
psd_tol  = 1e-9

_variant_names = {'transe': 'transE', 'transa': 'transA', 'psd': 'psd'}


def normalize_variant(name):
	''' Accepts any capitalisation of transE, transA or psd. '''
	key = str(name).lower()
	if key not in _variant_names:
		raise ValueError('Unknown model variant: %s' % name)
	return _variant_names[key]


class LossVector:
	'''
	The translation residual e = h + r - t and its entry-wise absolute value.
	'''
	def __init__(self, h, r, t):
		h, r, t = as_vector(h, 'h'), as_vector(r, 'r'), as_vector(t, 't')
		if not (h.shape == r.shape == t.shape):
			raise ValueError('Dimension mismatch: h%s, r%s, t%s' % (h.shape, r.shape, t.shape))
		self.e = h + r - t
		self.abs_e = np.abs(self.e)


def check_weight_matrix(W, k=None):
	'''
	Raise ValueError unless W is a symmetric, entry-wise non-negative k x k matrix.
	'''
	W = _as_square(W, k)
	if np.any(W < 0):
		raise ValueError('Weight matrix has negative entries (min %g)' % W.min())
	if np.max(np.abs(W - W.T)) > symmetry_tol:
		raise ValueError('Weight matrix is not symmetric (max asymmetry %g)' % np.max(np.abs(W - W.T)))
	return W


def check_psd(W, k=None):
	'''
	Raise ValueError unless W is symmetric positive semidefinite.
	'''
	W = _as_square(W, k)
	if np.max(np.abs(W - W.T)) > symmetry_tol:
		raise ValueError('Weight matrix is not symmetric (max asymmetry %g)' % np.max(np.abs(W - W.T)))
	lam_min = linalg.eigvalsh(W)[0] if W.size else 0.
	if lam_min < -psd_tol:
		raise ValueError('Weight matrix is not PSD (smallest eigenvalue %g)' % lam_min)
	return W


def _as_square(W, k=None):
	W = np.asarray(W, dtype=np.float64)
	if W.ndim != 2 or W.shape[0] != W.shape[1]:
		raise ValueError('Weight matrix must be square, got shape %s' % (W.shape,))
	if k is not None and W.shape[0] != k:
		raise ValueError('Weight matrix is %dx%d, expected %dx%d' % (W.shape[0], W.shape[0], k, k))
	return W


def score_transe(h, r, t):
	"""
	Squared Euclidean norm of h + r - t.

	Parameters
	----------
	h, r, t: ndarray
		k-dimensional head, relation and tail vectors.

	Returns
	-------
	float
	"""
	e = LossVector(h, r, t).e
	return float(np.dot(e, e))


def score_transa(h, r, t, W, check=True):
	"""
	Adaptive metric score |h+r-t|^T W |h+r-t|.

	Parameters
	----------
	h, r, t: ndarray
		k-dimensional head, relation and tail vectors.
	W: ndarray
		k x k symmetric, non-negative weight matrix.
	check: bool
		Validate W before scoring (Default: True).

	Returns
	-------
	float
	"""
	a = LossVector(h, r, t).abs_e
	if check: W = check_weight_matrix(W, a.size)
	return float(np.dot(a, np.dot(W, a)))


def score_psd(h, r, t, W, check=True):
	"""
	Quadratic score (h+r-t)^T W (h+r-t) with a PSD matrix and no absolute values.

	Parameters
	----------
	h, r, t: ndarray
		k-dimensional head, relation and tail vectors.
	W: ndarray
		k x k symmetric positive semidefinite matrix.
	check: bool
		Validate W before scoring (Default: True).

	Returns
	-------
	float
	"""
	e = LossVector(h, r, t).e
	if check: W = check_psd(W, e.size)
	return float(np.dot(e, np.dot(W, e)))


def induced_norm(e, W, check=True):
	'''
	sqrt(|e|^T W |e|), the norm induced by a weight matrix.
	'''
	a = np.abs(as_vector(e, 'e'))
	if check: W = check_weight_matrix(W, a.size)
	return float(np.sqrt(max(np.dot(a, np.dot(W, a)), 0.)))


def grad_transa(h, r, t, W, check=True):
	"""
	Gradient of score_transa with respect to h, r and t.

	The derivative with respect to e = h+r-t is 2 sign(e) * (W |e|),
	with sign(0) taken as 0.

	Parameters
	----------
	h, r, t: ndarray
		k-dimensional head, relation and tail vectors.
	W: ndarray
		k x k symmetric, non-negative weight matrix.

	Returns
	-------
	(df/dh, df/dr, df/dt) as ndarrays
	"""
	loss = LossVector(h, r, t)
	if check: W = check_weight_matrix(W, loss.e.size)
	g = 2.*np.sign(loss.e)*np.dot(W, loss.abs_e)
	return g, g.copy(), -g


def grad_psd(h, r, t, W, check=True):
	'''
	Gradient of score_psd with respect to h, r and t: df/de = 2 W e.
	'''
	e = LossVector(h, r, t).e
	if check: W = check_psd(W, e.size)
	g = 2.*np.dot(W, e)
	return g, g.copy(), -g


class EmbeddingModel:
	'''
	Entity and relation embeddings with the per-relation weight matrices.

	Attributes:
		entity_vecs (ndarray): |E| x k entity matrix
		relation_vecs (ndarray): |R| x k relation matrix
		weight_mats (ndarray or None): |R| x k x k weight matrices, None for transE
		variant (str): 'transE', 'transA' or 'psd'
		entity_hash, relation_hash (str or None): hashes of the vocabularies the model was trained on
	'''
	def __init__(self, entity_vecs, relation_vecs, weight_mats=None, variant='transA',
			entity_hash=None, relation_hash=None):
		self.variant = normalize_variant(variant)
		self.entity_vecs   = np.array(entity_vecs, dtype=np.float64, ndmin=2)
		self.relation_vecs = np.array(relation_vecs, dtype=np.float64, ndmin=2)
		k = self.entity_vecs.shape[1]
		if self.relation_vecs.shape[0] == 0: self.relation_vecs = self.relation_vecs.reshape(0, k)
		if self.relation_vecs.shape[1] != k:
			raise ValueError('Entity vectors have k=%d but relation vectors k=%d'
					% (k, self.relation_vecs.shape[1]))
		if not 1 <= k <= max_dim:
			raise ValueError('Embedding dimension must be in [1, %d], got %d' % (max_dim, k))
		if self.variant == 'transE':
			self.weight_mats = None
		elif weight_mats is None:
			self.weight_mats = np.tile(np.eye(k), (self.relation_vecs.shape[0], 1, 1))
		else:
			self.weight_mats = np.array(weight_mats, dtype=np.float64).reshape(-1, k, k)
			if self.weight_mats.shape[0] != self.relation_vecs.shape[0]:
				raise ValueError('Got %d weight matrices for %d relations'
						% (self.weight_mats.shape[0], self.relation_vecs.shape[0]))
		self.entity_hash   = entity_hash
		self.relation_hash = relation_hash

	@property
	def k(self):
		return self.entity_vecs.shape[1]

	@property
	def n_entities(self):
		return self.entity_vecs.shape[0]

	@property
	def n_relations(self):
		return self.relation_vecs.shape[0]

	def weight(self, r):
		''' The weight matrix of relation r (identity for transE). '''
		if self.weight_mats is None: return np.eye(self.k)
		return self.weight_mats[r]

	def copy(self):
		return EmbeddingModel(self.entity_vecs.copy(), self.relation_vecs.copy(),
			None if self.weight_mats is None else self.weight_mats.copy(),
			variant=self.variant, entity_hash=self.entity_hash, relation_hash=self.relation_hash)

	def check(self):
		'''
		Validate the variant invariants; raises ValueError on a violation.
		'''
		for name in ('entity_vecs', 'relation_vecs', 'weight_mats'):
			arr = getattr(self, name)
			if arr is not None and not np.all(np.isfinite(arr)):
				raise ValueError('%s holds non-finite values' % name)
		if self.variant == 'transA':
			for W in self.weight_mats: check_weight_matrix(W, self.k)
		elif self.variant == 'psd':
			for W in self.weight_mats: check_psd(W, self.k)
		return True


# Batched scoring. These assume validated matrices.

def loss_vectors(model, h, r, t):
	''' Rows of h + r - t for arrays of ids. '''
	return model.entity_vecs[h] + model.relation_vecs[r] - model.entity_vecs[t]


def _quad_rows(x, W, r):
	# row-wise x_i^T W_{r_i} x_i, grouped by relation
	out = np.empty(x.shape[0])
	r = np.asarray(r)
	for rel in np.unique(r):
		idx = r == rel
		xi  = x[idx]
		out[idx] = np.einsum('ij,ij->i', np.dot(xi, W[rel]), xi)
	return out


def score_rows(model, e, r):
	'''
	Scores of precomputed loss vectors e (rows) under relations r.
	'''
	if model.variant == 'transE':
		return np.einsum('ij,ij->i', e, e)
	if model.variant == 'transA':
		return _quad_rows(np.abs(e), model.weight_mats, r)
	return _quad_rows(e, model.weight_mats, r)


def grad_rows(model, e, r):
	'''
	Derivative of the score with respect to each loss-vector row.
	'''
	if model.variant == 'transE':
		return 2.*e
	r = np.asarray(r)
	out = np.empty_like(e)
	for rel in np.unique(r):
		idx = r == rel
		W = model.weight_mats[rel]
		if model.variant == 'transA':
			out[idx] = 2.*np.sign(e[idx])*np.dot(np.abs(e[idx]), W)
		else:
			out[idx] = 2.*np.dot(e[idx], W)
	return out


def score_triples(model, h, r, t):
	"""
	Scores of many triples at once.

	Parameters
	----------
	model: EmbeddingModel
	h, r, t: array of int
		Head, relation and tail ids.

	Returns
	-------
	ndarray of scores
	"""
	h, r, t = np.atleast_1d(h), np.atleast_1d(r), np.atleast_1d(t)
	return score_rows(model, loss_vectors(model, h, r, t), r)


def score_candidates(model, h, r, t, slot):
	'''
	Scores of every entity placed in the head or tail slot of (h, r, t).

	Returns:
		ndarray of length |E|; entry i is the score with entity i in the slot
	'''
	if slot == 'tail':
		e = (model.entity_vecs[h] + model.relation_vecs[r]) - model.entity_vecs
	elif slot == 'head':
		e = model.entity_vecs + model.relation_vecs[r] - model.entity_vecs[t]
	else:
		raise ValueError('Unknown slot: %s' % slot)
	return score_rows(model, e, np.full(e.shape[0], r))
