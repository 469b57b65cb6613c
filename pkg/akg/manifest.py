'''
Run manifests: a JSON record written next to the artifacts of every
command, so each output can be traced to the command line, configuration,
dataset files and seed that produced it.
'''

import os
import json
import time
from .kg_data import split_files
from .helper_functions import file_sha1, git_blob_hash, print_msg


def _now():
	return time.strftime('%Y-%m-%dT%H:%M:%S')


def dataset_checksums(dataset_dir):
	''' sha1 of every split file present in a dataset directory. '''
	sums = {}
	if dataset_dir is None: return sums
	for names in split_files.values():
		for name in names:
			path = os.path.join(dataset_dir, name)
			if os.path.isfile(path): sums[name] = file_sha1(path)
	return sums


class RunManifest:
	'''
	Record of one command run.

	Attributes:
		command (str): the subcommand
		argv (list): the full command line
		config (dict): the resolved configuration, if any
		dataset (str): dataset directory
		dataset_checksums (dict): file name -> sha1
		seed (int or None)
		started, finished (str): ISO timestamps
		checkpoint (str or None): checkpoint used or produced
		checkpoint_hash (str or None): git blob hash of that checkpoint
		artifacts (dict): artifact name -> path
		results (dict): headline numbers
	'''
	def __init__(self, command, argv, dataset=None, config=None, seed=None):
		self.command  = command
		self.argv     = list(argv)
		self.dataset  = dataset
		self.dataset_checksums = dataset_checksums(dataset)
		self.config   = {} if config is None else dict(config)
		self.seed     = seed
		self.started  = _now()
		self.finished = None
		self.checkpoint = None
		self.checkpoint_hash = None
		self.artifacts = {}
		self.results   = {}

	def set_checkpoint(self, filename):
		self.checkpoint = filename
		self.checkpoint_hash = git_blob_hash(filename)
		return self.checkpoint_hash

	def add_artifact(self, name, filename):
		self.artifacts[name] = filename

	def as_dict(self):
		return {'command': self.command, 'argv': self.argv, 'dataset': self.dataset,
			'dataset_checksums': self.dataset_checksums, 'config': self.config,
			'seed': self.seed, 'started': self.started, 'finished': self.finished,
			'checkpoint': self.checkpoint, 'checkpoint_hash': self.checkpoint_hash,
			'artifacts': self.artifacts, 'results': self.results}

	def write(self, out_dir):
		'''
		Write <command>_manifest.json into out_dir and return its path.
		'''
		self.finished = _now()
		filename = os.path.join(out_dir, '%s_manifest.json' % self.command.replace('-', '_'))
		with open(filename, 'w', encoding='utf-8') as f:
			json.dump(self.as_dict(), f, indent=2, sort_keys=True)
		print_msg('Manifest written to %s' % filename)
		return filename


def read_manifest(filename):
	''' The manifest as a dict. '''
	with open(filename, encoding='utf-8') as f:
		return json.load(f)
