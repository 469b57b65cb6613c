#This file contains various helper routines

import numpy as np
import hashlib
import time

verbose = True


def set_verbose(value):
	'''
	Switch the messages printed by the package on or off.

	Parameters:
		* value (bool): if False, print_msg and the progress bars are silent
	'''
	global verbose
	verbose = bool(value)


def print_msg(message, print_time=True):
	''' Print a message if verbose is true '''
	if verbose:
		if print_time:
			timestr = time.strftime('%Y/%m/%d %H:%M:%S')
			message = '%s --- %s' % (timestr, message)
		print(message)


def progress_disabled():
	''' True when tqdm bars should be hidden. '''
	return not verbose


def hash_names(names):
	'''
	Hash an ordered vocabulary.

	Parameters:
		* names (list of str): the vocabulary in id order

	Returns:
		sha1 hex digest of the names joined by newlines
	'''
	sha = hashlib.sha1()
	sha.update('\n'.join(names).encode('utf-8'))
	return sha.hexdigest()


def file_sha1(filename, block=1<<20):
	''' sha1 hex digest of a file's bytes. '''
	sha = hashlib.sha1()
	with open(filename, 'rb') as f:
		for chunk in iter(lambda: f.read(block), b''):
			sha.update(chunk)
	return sha.hexdigest()


def git_blob_hash(filename):
	'''
	Content hash of a file computed the way git hashes a blob,
	sha1 of "blob <size>\\0<bytes>".
	'''
	with open(filename, 'rb') as f:
		data = f.read()
	sha = hashlib.sha1()
	sha.update(b'blob %d\0' % len(data))
	sha.update(data)
	return sha.hexdigest()


def as_vector(x, name='vector'):
	''' Convert to a 1-D float64 array, raising on anything else. '''
	x = np.asarray(x, dtype=np.float64)
	if x.ndim != 1:
		raise ValueError('%s must be one-dimensional, got shape %s' % (name, x.shape))
	return x
