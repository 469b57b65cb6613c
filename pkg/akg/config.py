'''
Training configuration: defaults, the published presets of the four
benchmarks, flat key-value config files and grid enumeration.
'''

import itertools
import warnings
from .metric_core import normalize_variant, max_dim
from .kg_data import strategies
from .helper_functions import print_msg

# name: (type, default). The defaults are the WN18 configuration.
fields = {
	'alpha'            : (float, 0.001),
	'k'                : (int, 50),
	'gamma'            : (float, 2.0),
	'C'                : (float, 0.2),
	'lam'              : (float, 0.0),
	'epochs'           : (int, 1000),
	'batch_size'       : (int, 100),
	'strategy'         : (str, 'bern'),
	'variant'          : (str, 'transA'),
	'w_update_period'  : (int, 1),
	'seed'             : (int, 0),
	'validation_period': (int, 10),
	'patience'         : (int, 10),
	'valid_sample'     : (int, 0),
	'project_entities' : (bool, False),
	'workers'          : (int, 1),
	'mode'             : (str, 'auto'),
}

# spellings accepted in config files and on the command line
aliases = {'lambda': 'lam', 'dim': 'k', 'learning_rate': 'alpha', 'margin': 'gamma'}

modes = ('auto', 'link', 'class')


class TrainConfig:
	'''
	Hyperparameters of the margin objective and the training schedule.

	Attributes:
		alpha (float): learning rate
		k (int): embedding dimension
		gamma (float): margin, in score units
		C (float): weight of the embedding-norm penalty
		lam (float): weight of the F-norm penalty on the weight matrices
		epochs (int): number of epochs
		batch_size (int): minibatch size
		strategy (str): 'unif' or 'bern' negative sampling
		variant (str): 'transE', 'transA' or 'psd'
		w_update_period (int): epochs between weight-matrix solves
		seed (int): random seed
		validation_period (int): epochs between validation rounds
		patience (int): validation rounds without improvement before stopping
		valid_sample (int): validation triples used for link-prediction validation (0 = all)
		project_entities (bool): rescale entity vectors into the unit ball after each step
		workers (int): number of threads; 1 is the deterministic path
		mode (str): 'link', 'class' or 'auto' (class when the validation split is labelled)
	'''
	def __init__(self, **kwargs):
		for name, (_, default) in fields.items():
			setattr(self, name, default)
		self.update(**kwargs)

	def update(self, **kwargs):
		for key, value in kwargs.items():
			name = aliases.get(key, key)
			if name not in fields:
				raise ValueError('Unknown configuration key: %s' % key)
			setattr(self, name, parse_value(name, value))
		return self

	def check(self):
		''' Raise ValueError on out-of-range values. '''
		if not self.alpha > 0: raise ValueError('alpha must be > 0, got %g' % self.alpha)
		if not self.gamma > 0: raise ValueError('gamma must be > 0, got %g' % self.gamma)
		if self.C < 0: raise ValueError('C must be >= 0, got %g' % self.C)
		if self.lam < 0: raise ValueError('lambda must be >= 0, got %g' % self.lam)
		if self.epochs < 1: raise ValueError('epochs must be >= 1, got %d' % self.epochs)
		if self.batch_size < 1: raise ValueError('batch_size must be >= 1, got %d' % self.batch_size)
		if self.w_update_period < 1:
			raise ValueError('w_update_period must be >= 1, got %d' % self.w_update_period)
		if self.validation_period < 1:
			raise ValueError('validation_period must be >= 1, got %d' % self.validation_period)
		if self.patience < 1: raise ValueError('patience must be >= 1, got %d' % self.patience)
		if self.workers < 1: raise ValueError('workers must be >= 1, got %d' % self.workers)
		if not 1 <= self.k <= max_dim:
			raise ValueError('k must be in [1, %d], got %d' % (max_dim, self.k))
		if self.strategy not in strategies:
			raise ValueError('Unknown sampling strategy: %s' % self.strategy)
		if self.mode not in modes: raise ValueError('Unknown mode: %s' % self.mode)
		self.variant = normalize_variant(self.variant)
		return self

	def as_dict(self):
		return {name: getattr(self, name) for name in fields}

	def copy(self):
		return TrainConfig(**self.as_dict())

	def __repr__(self):
		return 'TrainConfig(%s)' % ', '.join('%s=%r' % kv for kv in self.as_dict().items())


def parse_value(name, value):
	kind = fields[name][0]
	if kind is bool and isinstance(value, str):
		low = value.strip().lower()
		if low in ('1', 'true', 'yes', 'on'): return True
		if low in ('0', 'false', 'no', 'off'): return False
		raise ValueError('Invalid boolean for %s: %s' % (name, value))
	if name == 'variant': return normalize_variant(value)
	try:
		return kind(value.strip() if isinstance(value, str) else value)
	except (TypeError, ValueError):
		raise ValueError('Invalid value for %s: %r' % (name, value))


presets = ('wn18', 'fb15k', 'wn11', 'fb13')

def preset_config(name):
	'''
	The published configuration of a benchmark. All use bern sampling.

	Parameters:
		name (str): 'wn18', 'fb15k', 'wn11' or 'fb13'

	Returns:
		TrainConfig
	'''
	name = name.lower()
	if name == 'wn18':
		print_msg('Using the WN18 configuration')
		values = dict(alpha=0.001, k=50, gamma=2.0, C=0.2, mode='link')
	elif name == 'fb15k':
		print_msg('Using the FB15K configuration')
		values = dict(alpha=0.002, k=200, gamma=3.2, C=0.2, mode='link')
	elif name == 'wn11':
		print_msg('Using the WN11 configuration')
		values = dict(alpha=0.02, k=50, gamma=10.0, C=0.2, mode='class')
	elif name == 'fb13':
		print_msg('Using the FB13 configuration')
		values = dict(alpha=0.002, k=200, gamma=3.0, C=0.00002, mode='class')
	else:
		raise ValueError('Unknown preset: %s' % name)
	return TrainConfig(strategy='bern', **values)


def read_config_file(filename):
	'''
	Read a flat "key = value" file. Lines starting with # are comments.
	A comma-separated value is a list of grid values.

	Returns:
		dict of key -> str or list of str
	'''
	params = {}
	with open(filename, encoding='utf-8') as f:
		for lineno, line in enumerate(f, start=1):
			line = line.split('#', 1)[0].strip()
			if not line: continue
			if '=' not in line:
				raise ValueError('%s:%d: expected "key = value"' % (filename, lineno))
			key, value = [s.strip() for s in line.split('=', 1)]
			name = aliases.get(key, key)
			if name not in fields:
				raise ValueError('%s:%d: unknown configuration key %s' % (filename, lineno, key))
			values = [v.strip() for v in value.split(',')]
			params[name] = values if len(values) > 1 else values[0]
	return params


def expand_grid(params):
	'''
	Enumerate the cartesian product of the list-valued entries.

	Parameters:
		params (dict): key -> value or list of values

	Returns:
		list of dicts with scalar values, in a fixed order
	'''
	keys = sorted(params)
	choices = [params[k] if isinstance(params[k], (list, tuple)) else [params[k]] for k in keys]
	return [dict(zip(keys, combo)) for combo in itertools.product(*choices)]


def check_conflicts(cfg, explicit):
	'''
	Warn about settings that have no effect for the chosen variant.

	Parameters:
		cfg (TrainConfig): the resolved configuration
		explicit (iterable): keys the user set explicitly

	Returns:
		list of warning messages
	'''
	explicit = set(aliases.get(k, k) for k in explicit)
	messages = []
	if normalize_variant(cfg.variant) == 'transE':
		if 'lam' in explicit:
			messages.append('lambda is ignored by the transE variant')
		if 'w_update_period' in explicit:
			messages.append('w_update_period is ignored by the transE variant')
	for msg in messages: warnings.warn(msg)
	return messages
