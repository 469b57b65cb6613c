'''
Single-line progress messages for loops that run without a progress bar.
'''

import sys
from . import helper_functions as hf


def loading_msg(done, total, what='items'):
	''' Overwrite the current terminal line with "Completed: done/total what (p%)". '''
	if not hf.verbose: return
	pct = 100.*done/total if total else 100.
	sys.stdout.write('\rCompleted: %d/%d %s (%.0f%%)' % (done, total, what, pct))
	sys.stdout.flush()

def loading_done():
	if not hf.verbose: return
	sys.stdout.write('\n')
	sys.stdout.flush()
