'''
Methods to read knowledge-graph benchmark files, build vocabularies,
compute dataset statistics and corrupt triples into negatives.
'''

import os
import numpy as np
from .helper_functions import print_msg

column_orders = ('hrt', 'htr')
categories    = ('1-1', '1-N', 'N-1', 'N-N')
strategies    = ('unif', 'bern')
targets       = ('head', 'tail', 'either')

# File names searched by read_dataset; the classification benchmarks call
# their validation split dev.txt.
split_files = {
	'train': ('train.txt',),
	'valid': ('valid.txt', 'dev.txt'),
	'test' : ('test.txt',),
}

_label_tokens = {'1': True, '+1': True, '-1': False}


class RawTriples:
	'''
	Triples of names as read from one file.

	Attributes:
		triples (list): (head, relation, tail) name tuples in file order
		labels (list or None): True/False per triple, None if the file carries no labels
		filename (str): the file the triples were read from
	'''
	def __init__(self, triples, labels=None, filename=None):
		self.triples  = list(triples)
		self.labels   = None if labels is None else [bool(l) for l in labels]
		self.filename = filename
		if self.labels is not None and len(self.labels) != len(self.triples):
			raise ValueError('Got %d labels for %d triples' % (len(self.labels), len(self.triples)))

	def __len__(self):
		return len(self.triples)


def load_triples(filename, column_order='hrt'):
	"""
	Read a tab-separated triple file.

	Parameters
	----------
	filename: str
		Path to the file. Each nonempty line holds three fields, or four
		when a trailing 1/-1 label marks positive/negative triples.
	column_order: str
		'hrt' for head-relation-tail lines, 'htr' for head-tail-relation lines (Default: 'hrt').

	Returns
	-------
	RawTriples with the triples in file order and the labels if present.
	"""
	if column_order not in column_orders:
		raise ValueError('Unknown column order: %s' % column_order)
	if not os.path.isfile(filename):
		raise IOError('Could not find triple file %s' % filename)
	triples, labels = [], []
	has_labels = False
	with open(filename, 'rb') as f:
		for lineno, raw in enumerate(f, start=1):
			try:
				line = raw.decode('utf-8').rstrip('\r\n')
			except UnicodeDecodeError as err:
				raise ValueError('%s:%d: invalid UTF-8 (%s)' % (filename, lineno, err.reason))
			if not line.strip(): continue
			fields = line.split('\t')
			if len(fields) not in (3, 4):
				raise ValueError('%s:%d: expected 3 tab-separated fields (4 with a label), got %d'
						% (filename, lineno, len(fields)))
			if column_order == 'hrt': h, r, t = fields[:3]
			else: h, t, r = fields[:3]
			triples.append((h, r, t))
			if len(fields) == 4:
				token = fields[3].strip()
				if token not in _label_tokens:
					raise ValueError('%s:%d: unknown label token %r' % (filename, lineno, token))
				labels.append(_label_tokens[token])
				has_labels = True
			else:
				labels.append(True)
	print_msg('Read %d triples from %s' % (len(triples), filename))
	return RawTriples(triples, labels if has_labels else None, filename=filename)


class TripleSet:
	'''
	Integer-encoded knowledge graph with its train/valid/test splits.

	Build it with build_tripleset or read_dataset. The arrays are
	read-only once constructed.

	Attributes:
		entities (list): entity names in id order
		relations (list): relation names in id order
		train, valid, test (numpy arrays): (n,3) int64 arrays of (head, relation, tail) ids
		train_labels, valid_labels, test_labels: boolean arrays, or None when a split is unlabelled
	'''
	def __init__(self, entities, relations, train, valid, test, labels=(None, None, None)):
		self.entities  = list(entities)
		self.relations = list(relations)
		self.entity_ids   = {name: i for i, name in enumerate(self.entities)}
		self.relation_ids = {name: i for i, name in enumerate(self.relations)}
		self.train = _frozen(np.asarray(train, dtype=np.int64).reshape(-1, 3))
		self.valid = _frozen(np.asarray(valid, dtype=np.int64).reshape(-1, 3))
		self.test  = _frozen(np.asarray(test, dtype=np.int64).reshape(-1, 3))
		self.train_labels, self.valid_labels, self.test_labels = [
			None if lab is None else _frozen(np.asarray(lab, dtype=bool)) for lab in labels]
		if self.train.size == 0:
			raise ValueError('The training split is empty')
		for name in ('train', 'valid', 'test'):
			arr = getattr(self, name)
			if arr.size and (arr[:,[0,2]].min() < 0 or arr[:,[0,2]].max() >= self.n_entities
					or arr[:,1].min() < 0 or arr[:,1].max() >= self.n_relations):
				raise ValueError('Ids of the %s split are outside the vocabularies' % name)

		self.train_keys = _frozen(np.unique(self.triple_keys(self.positives('train'))))
		self.all_positive_keys = _frozen(np.unique(np.concatenate(
			[self.triple_keys(self.positives(s)) for s in ('train', 'valid', 'test')])))

		# per-relation counts over the training split
		train = self.positives('train')
		R, E = self.n_relations, self.n_entities
		self.rel_count = _frozen(np.bincount(train[:,1], minlength=R))
		self.rel_heads = _frozen(np.bincount(np.unique(train[:,1]*E + train[:,0]) // E, minlength=R))
		self.rel_tails = _frozen(np.bincount(np.unique(train[:,1]*E + train[:,2]) // E, minlength=R))

	@property
	def n_entities(self):
		return len(self.entities)

	@property
	def n_relations(self):
		return len(self.relations)

	def split(self, name):
		if name not in ('train', 'valid', 'test'):
			raise ValueError('Unknown split: %s' % name)
		return getattr(self, name)

	def labels(self, name):
		self.split(name)
		return getattr(self, name + '_labels')

	def positives(self, name):
		''' The positively labelled triples of a split. '''
		arr, lab = self.split(name), self.labels(name)
		return arr if lab is None else arr[lab]

	def encode(self, triple):
		''' (head, relation, tail) names -> ids. '''
		h, r, t = triple
		try:
			return (self.entity_ids[h], self.relation_ids[r], self.entity_ids[t])
		except KeyError as err:
			raise ValueError('Unknown name %s' % err)

	def decode(self, triple):
		''' (head, relation, tail) ids -> names. '''
		h, r, t = [int(x) for x in triple]
		return (self.entities[h], self.relations[r], self.entities[t])

	def triple_keys(self, triples):
		''' A unique int64 key per (h,r,t), used for membership tests. '''
		triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
		return (triples[:,0]*self.n_relations + triples[:,1])*self.n_entities + triples[:,2]

	def is_train_positive(self, triples):
		return _isin_sorted(self.triple_keys(triples), self.train_keys)

	def is_known_positive(self, triples):
		''' Membership in the positives of train, valid and test. '''
		return _isin_sorted(self.triple_keys(triples), self.all_positive_keys)


def _frozen(arr):
	arr.flags.writeable = False
	return arr

def _isin_sorted(keys, sorted_keys):
	if sorted_keys.size == 0: return np.zeros(keys.shape, dtype=bool)
	idx = np.searchsorted(sorted_keys, keys)
	idx[idx == sorted_keys.size] = 0
	return sorted_keys[idx] == keys


def build_tripleset(train, valid=None, test=None):
	"""
	Encode the splits of a knowledge graph with shared vocabularies.

	Names first seen in the valid or test split are added to the
	vocabularies as well.

	Parameters
	----------
	train, valid, test: RawTriples or list of (head, relation, tail) names
		The splits. valid and test may be None.

	Returns
	-------
	TripleSet
	"""
	splits = [_as_raw(s) for s in (train, valid, test)]
	if len(splits[0]) == 0:
		raise ValueError('The training split is empty')
	entity_ids, relation_ids = {}, {}
	encoded = []
	for raw in splits:
		rows = np.empty((len(raw), 3), dtype=np.int64)
		for i, (h, r, t) in enumerate(raw.triples):
			rows[i,0] = entity_ids.setdefault(h, len(entity_ids))
			rows[i,1] = relation_ids.setdefault(r, len(relation_ids))
			rows[i,2] = entity_ids.setdefault(t, len(entity_ids))
		encoded.append(rows)
	ts = TripleSet(list(entity_ids), list(relation_ids), encoded[0], encoded[1], encoded[2],
			labels=[raw.labels for raw in splits])
	print_msg('Vocabularies: %d entities, %d relations' % (ts.n_entities, ts.n_relations))
	return ts

def _as_raw(split):
	if split is None: return RawTriples([])
	if isinstance(split, RawTriples): return split
	return RawTriples(split)


def find_split_file(dataset_dir, split):
	'''
	Path of a split file in a dataset directory.
	Raises IOError naming the expected filename if it is missing.
	'''
	for name in split_files[split]:
		path = os.path.join(dataset_dir, name)
		if os.path.isfile(path): return path
	raise IOError('Missing %s split: expected %s in %s'
			% (split, ' or '.join(split_files[split]), dataset_dir))


def read_dataset(dataset_dir, column_order='hrt'):
	"""
	Read train.txt, valid.txt (or dev.txt) and test.txt from a directory.

	Parameters
	----------
	dataset_dir: str
		The directory holding the split files.
	column_order: str
		Field order of the files, 'hrt' or 'htr' (Default: 'hrt').

	Returns
	-------
	TripleSet
	"""
	raws = [load_triples(find_split_file(dataset_dir, s), column_order=column_order)
			for s in ('train', 'valid', 'test')]
	if raws[0].labels is not None and not all(raws[0].labels):
		raise ValueError('The training split must hold positive triples only')
	raws[0].labels = None
	return build_tripleset(*raws)


def atpe(ts):
	'''
	Averaged triple number per entity: all positive triples of the three
	splits divided by the number of entities.
	'''
	if ts.n_entities == 0:
		raise ValueError('The triple set has no entities')
	total = sum(len(ts.positives(s)) for s in ('train', 'valid', 'test'))
	return total/float(ts.n_entities)


def dataset_statistics(ts):
	'''
	Dataset statistics table row.

	Returns:
		dict with keys rel, ent, train, valid, test (positive counts) and atpe
	'''
	return {'rel': ts.n_relations, 'ent': ts.n_entities,
		'train': len(ts.positives('train')), 'valid': len(ts.positives('valid')),
		'test': len(ts.positives('test')), 'atpe': atpe(ts)}


class RelationStats:
	'''
	Mapping property of one relation on the training split.

	Attributes:
		relation_id (int)
		tph (float): mean number of tails per head
		hpt (float): mean number of heads per tail
		category (str): one of '1-1', '1-N', 'N-1', 'N-N'
	'''
	def __init__(self, relation_id, n_triples, n_heads, n_tails):
		self.relation_id = int(relation_id)
		self.n_triples = int(n_triples)
		self.n_heads   = int(n_heads)
		self.n_tails   = int(n_tails)
		self.tph = self.n_triples/float(self.n_heads)
		self.hpt = self.n_triples/float(self.n_tails)
		self.category = mapping_category(self.n_triples, self.n_heads, self.n_tails)

	def __repr__(self):
		return 'RelationStats(relation_id=%d, tph=%g, hpt=%g, category=%s)' % (
			self.relation_id, self.tph, self.hpt, self.category)


def mapping_category(n_triples, n_heads, n_tails):
	'''
	Category from the 1.5 threshold on tph and hpt, compared by
	cross-multiplication so the cut is exact.
	'''
	many_tails = 2*n_triples >= 3*n_heads
	many_heads = 2*n_triples >= 3*n_tails
	if not many_tails and not many_heads: return '1-1'
	if many_tails and not many_heads: return '1-N'
	if not many_tails and many_heads: return 'N-1'
	return 'N-N'


def relation_stats(ts, relation_id):
	"""
	Tails-per-head, heads-per-tail and category of a training relation.

	Parameters
	----------
	ts: TripleSet
	relation_id: int or str
		Relation id, or its name.

	Returns
	-------
	RelationStats
	"""
	if isinstance(relation_id, str):
		if relation_id not in ts.relation_ids:
			raise ValueError('Unknown relation: %s' % relation_id)
		relation_id = ts.relation_ids[relation_id]
	if not 0 <= relation_id < ts.n_relations or ts.rel_count[relation_id] == 0:
		raise ValueError('Relation %s has no training triples' % relation_id)
	return RelationStats(relation_id, ts.rel_count[relation_id],
			ts.rel_heads[relation_id], ts.rel_tails[relation_id])


def relation_categories(ts):
	'''
	Category of every relation, None for relations absent from training.
	'''
	out = []
	for r in range(ts.n_relations):
		n = ts.rel_count[r]
		out.append(mapping_category(n, ts.rel_heads[r], ts.rel_tails[r]) if n else None)
	return out


class CorruptionSpec:
	'''
	How negatives are drawn.

	Attributes:
		strategy (str): 'unif' or 'bern'
		target (str): 'head', 'tail' or 'either'
		rng_seed (int): seed used by make_rng
	'''
	def __init__(self, strategy='bern', target='either', rng_seed=0):
		if strategy not in strategies:
			raise ValueError('Unknown sampling strategy: %s' % strategy)
		if target not in targets:
			raise ValueError('Unknown corruption target: %s' % target)
		self.strategy = strategy
		self.target   = target
		self.rng_seed = int(rng_seed)

	def make_rng(self):
		return np.random.default_rng(self.rng_seed)


def head_probability(ts, relation_ids, spec):
	'''
	Probability of replacing the head for each relation id.
	Under bern it is tph/(tph+hpt) = #tails/(#heads+#tails) from the
	training split; relations without training triples fall back to 1/2.
	'''
	relation_ids = np.asarray(relation_ids, dtype=np.int64)
	if spec.target == 'head': return np.ones(relation_ids.shape)
	if spec.target == 'tail': return np.zeros(relation_ids.shape)
	if spec.strategy == 'unif': return np.full(relation_ids.shape, 0.5)
	heads = ts.rel_heads[relation_ids].astype(np.float64)
	tails = ts.rel_tails[relation_ids].astype(np.float64)
	denom = heads + tails
	prob = np.full(relation_ids.shape, 0.5)
	ok = denom > 0
	prob[ok] = tails[ok]/denom[ok]
	return prob


def corrupt(triple, spec, ts, rng=None):
	"""
	Replace the head or the tail of a training triple so that the result
	is not a training positive.

	Parameters
	----------
	triple: sequence of three ints
		The (head, relation, tail) ids.
	spec: CorruptionSpec
	ts: TripleSet
	rng: numpy Generator
		Random stream. If None, one is seeded from spec.rng_seed.

	Returns
	-------
	numpy array with the corrupted (head, relation, tail) ids.
	"""
	if rng is None: rng = spec.make_rng()
	h, r, t = [int(x) for x in triple]
	E = ts.n_entities
	p_head = head_probability(ts, [r], spec)[0]
	for _ in range(E):
		cand = np.array([h, r, t], dtype=np.int64)
		if rng.random() < p_head: cand[0] = rng.integers(E)
		else: cand[2] = rng.integers(E)
		if not ts.is_train_positive(cand)[0]: return cand
	# exhaustive pass over the remaining candidates
	cands = []
	ents  = np.arange(E, dtype=np.int64)
	if p_head > 0: cands.append(np.column_stack([ents, np.full(E, r), np.full(E, t)]))
	if p_head < 1: cands.append(np.column_stack([np.full(E, h), np.full(E, r), ents]))
	cands = np.concatenate(cands)
	cands = cands[~ts.is_train_positive(cands)]
	if cands.shape[0] == 0:
		raise RuntimeError('No corruption of %s is absent from the training positives after %d attempts'
				% (str(ts.decode((h, r, t))), E))
	return cands[rng.integers(cands.shape[0])]


def corrupt_batch(triples, spec, ts, rng):
	'''
	Vectorised corrupt: one negative per row of triples.

	Parameters:
		triples (numpy array): (n,3) training triples
		spec (CorruptionSpec): sampling strategy
		ts (TripleSet): the knowledge graph
		rng (numpy Generator): random stream

	Returns:
		(n,3) int64 array of negatives
	'''
	triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
	E = ts.n_entities
	p_head  = head_probability(ts, triples[:,1], spec)
	neg     = triples.copy()
	pending = np.arange(triples.shape[0])
	for _ in range(E):
		if pending.size == 0: break
		use_head = rng.random(pending.size) < p_head[pending]
		repl = rng.integers(0, E, size=pending.size)
		cand = triples[pending].copy()
		cand[use_head,0]  = repl[use_head]
		cand[~use_head,2] = repl[~use_head]
		ok = ~ts.is_train_positive(cand)
		neg[pending[ok]] = cand[ok]
		pending = pending[~ok]
	for i in pending:
		neg[i] = corrupt(triples[i], spec, ts, rng)
	return neg
