'''
Reading and writing model checkpoints.

Text layout (one file, UTF-8)::

	# adaptivekg checkpoint
	format 1
	variant transA
	k 50
	entities 40943
	relations 18
	entity_hash <sha1 of the entity names>
	relation_hash <sha1 of the relation names>
	[entity_vecs]
	<|E| lines of k numbers>
	[relation_vecs]
	<|R| lines of k numbers>
	[weight_mats]
	<|R|*k lines of k numbers, relation by relation; absent for transE>

Numbers are written with 17 significant digits so a text round trip
is bit-exact. Files ending in .npz are written as numpy archives with
the same fields.
'''

import numpy as np
from .metric_core import EmbeddingModel
from .helper_functions import print_msg, hash_names

format_version = 1
_sections = ('entity_vecs', 'relation_vecs', 'weight_mats')


class ModelFile:
	'''
	A model checkpoint on disk.

	Use the read_from_file method to load a checkpoint, or
	pass the filename to the constructor.

	Attributes:
		model (EmbeddingModel): the model held by the file
		header (dict): the header fields
	'''
	def __init__(self, filename=None):
		self.model  = None
		self.header = {}
		if filename:
			self.read_from_file(filename)

	def read_from_file(self, filename):
		'''
		Read a text or .npz checkpoint.

		Parameters:
			filename (string): the file to read from.
		Returns:
			Nothing
		'''
		print_msg('Reading checkpoint %s...' % filename)
		self.filename = filename
		if filename.endswith('.npz'): self._read_npz(filename)
		else: self._read_text(filename)
		print_msg('...done')

	def _read_text(self, filename):
		with open(filename, encoding='utf-8') as f:
			lines = f.read().splitlines()
		header, blocks, current = {}, {}, None
		for line in lines:
			if not line.strip() or line.startswith('#'): continue
			if line.startswith('[') and line.endswith(']'):
				current = line[1:-1]
				if current not in _sections:
					raise ValueError('%s: unknown section %s' % (filename, line))
				blocks[current] = []
			elif current is None:
				key, _, value = line.partition(' ')
				header[key] = value.strip()
			else:
				blocks[current].append(line)
		for key in ('format', 'variant', 'k', 'entities', 'relations'):
			if key not in header:
				raise ValueError('%s: header field %s is missing' % (filename, key))
		k, nE, nR = int(header['k']), int(header['entities']), int(header['relations'])
		ent = _parse_block(blocks.get('entity_vecs', []), nE, k, filename, 'entity_vecs')
		rel = _parse_block(blocks.get('relation_vecs', []), nR, k, filename, 'relation_vecs')
		W = None
		if 'weight_mats' in blocks:
			W = _parse_block(blocks['weight_mats'], nR*k, k, filename, 'weight_mats').reshape(nR, k, k)
		self.header = header
		self.model = EmbeddingModel(ent, rel, W, variant=header['variant'],
				entity_hash=header.get('entity_hash'), relation_hash=header.get('relation_hash'))

	def _read_npz(self, filename):
		data = np.load(filename, allow_pickle=False)
		header = {'format': str(data['format']), 'variant': str(data['variant']),
			'entity_hash': str(data['entity_hash']) or None,
			'relation_hash': str(data['relation_hash']) or None}
		W = data['weight_mats'] if data['weight_mats'].size else None
		self.header = header
		self.model = EmbeddingModel(data['entity_vecs'], data['relation_vecs'], W,
				variant=header['variant'], entity_hash=header['entity_hash'],
				relation_hash=header['relation_hash'])
		header['k'] = str(self.model.k)


def _parse_block(rows, n, k, filename, name):
	if len(rows) != n:
		raise ValueError('%s: section %s has %d rows, expected %d' % (filename, name, len(rows), n))
	if n == 0: return np.zeros((0, k))
	arr = np.loadtxt(rows, dtype=np.float64, ndmin=2)
	if arr.shape != (n, k):
		raise ValueError('%s: section %s has shape %s, expected %s' % (filename, name, arr.shape, (n, k)))
	return arr


def save_model(model, filename):
	'''
	Write a checkpoint. Files ending in .npz are binary, anything
	else is the text layout described in the module docstring.

	Parameters:
		* model (EmbeddingModel): the model to save
		* filename (string): the file to write

	Returns:
		Nothing
	'''
	print_msg('Saving checkpoint %s' % filename)
	if filename.endswith('.npz'):
		empty = np.zeros((0,))
		np.savez(filename, format=np.array(format_version), variant=np.array(model.variant),
			entity_hash=np.array(model.entity_hash or ''), relation_hash=np.array(model.relation_hash or ''),
			entity_vecs=model.entity_vecs, relation_vecs=model.relation_vecs,
			weight_mats=empty if model.weight_mats is None else model.weight_mats)
		return
	k = model.k
	with open(filename, 'w', encoding='utf-8') as f:
		f.write('# adaptivekg checkpoint\n')
		f.write('format %d\n' % format_version)
		f.write('variant %s\n' % model.variant)
		f.write('k %d\n' % k)
		f.write('entities %d\n' % model.n_entities)
		f.write('relations %d\n' % model.n_relations)
		if model.entity_hash: f.write('entity_hash %s\n' % model.entity_hash)
		if model.relation_hash: f.write('relation_hash %s\n' % model.relation_hash)
		f.write('[entity_vecs]\n')
		np.savetxt(f, model.entity_vecs, fmt='%.17g')
		f.write('[relation_vecs]\n')
		np.savetxt(f, model.relation_vecs, fmt='%.17g')
		if model.weight_mats is not None:
			f.write('[weight_mats]\n')
			np.savetxt(f, model.weight_mats.reshape(-1, k), fmt='%.17g')


def load_model(filename, ts=None):
	'''
	Read a checkpoint.

	Parameters:
		* filename (string): the checkpoint
		* ts = None (TripleSet): if given, the vocabulary hashes stored in
			the checkpoint must match the triple set's vocabularies

	Returns:
		EmbeddingModel
	'''
	model = ModelFile(filename).model
	if ts is not None: check_vocabulary(model, ts)
	return model


def check_vocabulary(model, ts):
	''' Raise ValueError if the model was trained on other vocabularies. '''
	if model.n_entities != ts.n_entities or model.n_relations != ts.n_relations:
		raise ValueError('Model has %d entities/%d relations, dataset has %d/%d'
				% (model.n_entities, model.n_relations, ts.n_entities, ts.n_relations))
	if model.entity_hash and model.entity_hash != hash_names(ts.entities):
		raise ValueError('Entity vocabulary of the model does not match the dataset')
	if model.relation_hash and model.relation_hash != hash_names(ts.relations):
		raise ValueError('Relation vocabulary of the model does not match the dataset')
