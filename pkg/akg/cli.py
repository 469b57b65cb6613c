'''
Command line interface: akg <command> [options].

Commands:
	stats            dataset statistics
	train            train a model, writing checkpoints and a training report
	eval-link        link prediction (Mean Rank, HITS@10, per-category table)
	eval-class       triple classification with per-relation thresholds
	analyze-weights  weight difference of the LDL weights of every relation
	export-pca       2-D PCA coordinates of the embeddings around one relation

Every command writes comma-separated tables and a <command>_manifest.json
into --out. Errors end the run with exit status 1 and one line
"akg-error <command>: <message>" on stderr.
'''

import os
import sys
import csv
import argparse
from . import helper_functions as hf
from .helper_functions import print_msg
from .kg_data import read_dataset, dataset_statistics, column_orders, strategies
from .config import TrainConfig, fields, presets, preset_config, read_config_file, expand_grid, check_conflicts
from .model_file import save_model, load_model
from .training import train
from .evaluation import link_prediction, tune_thresholds, classify, classify_per_relation, \
	write_rank_report, write_category_table, write_ranks, write_classification
from .analysis import weight_table, write_weight_table, export_pca, write_pca
from .manifest import RunManifest

data_env = 'ADAPTIVEKG_DATA'

# flag -> TrainConfig field
train_flags = (
	('--alpha', 'alpha'), ('--k', 'k'), ('--gamma', 'gamma'), ('--C', 'C'),
	('--lambda', 'lam'), ('--epochs', 'epochs'), ('--batch-size', 'batch_size'),
	('--strategy', 'strategy'), ('--variant', 'variant'),
	('--w-update-period', 'w_update_period'), ('--seed', 'seed'),
	('--validation-period', 'validation_period'), ('--patience', 'patience'),
	('--valid-sample', 'valid_sample'), ('--mode', 'mode'),
)


def resolve_dataset(name):
	'''
	A dataset directory given on the command line. Relative names that
	do not exist are looked up under $ADAPTIVEKG_DATA.
	'''
	if name is None: return None
	if os.path.isdir(name) or os.path.isabs(name): return name
	root = os.environ.get(data_env)
	if root and os.path.isdir(os.path.join(root, name)):
		return os.path.join(root, name)
	return name


class ArgumentError(ValueError):
	''' A bad command line; command is the subcommand being parsed. '''
	def __init__(self, command, message):
		ValueError.__init__(self, message)
		self.command = command


class ArgumentParser(argparse.ArgumentParser):
	'''
	Raises ArgumentError instead of printing the usage and exiting, so
	main can report it on one line.
	'''
	def error(self, message):
		parts = self.prog.split()
		raise ArgumentError(parts[-1] if len(parts) > 1 else parts[0], message)


def build_parser():
	parser = ArgumentParser(prog='akg', description='Knowledge-graph embeddings with adaptive metrics.')
	sub = parser.add_subparsers(dest='command')
	sub.required = True

	def common(p, dataset=True, model=False):
		if dataset:
			p.add_argument('--dataset', required=dataset == 'required',
				help='dataset directory (relative names are looked up under $%s)' % data_env)
			p.add_argument('--column-order', choices=column_orders, default='hrt',
				help='field order of the triple files (default hrt; the original WN18/FB15K files are htr)')
		if model:
			p.add_argument('--model', required=True, help='checkpoint file')
		p.add_argument('--out', default='.', help='output directory')
		p.add_argument('--workers', type=int, default=None, help='number of threads; 1 is deterministic')
		p.add_argument('--quiet', action='store_true', help='no progress messages')

	common(sub.add_parser('stats', help='dataset statistics'), dataset='required')

	p = sub.add_parser('train', help='train a model')
	common(p, dataset='required')
	p.add_argument('--preset', choices=presets, help='published configuration of a benchmark')
	p.add_argument('--config', help='key = value configuration file; comma-separated values form a grid')
	for flag, name in train_flags:
		flags = (flag, '--dim') if name == 'k' else (flag,)
		choices = strategies if name == 'strategy' else None
		p.add_argument(*flags, dest=name, default=None, type=fields[name][0], choices=choices)
	p.add_argument('--project-entities', dest='project_entities', action='store_const', const=True, default=None,
		help='rescale entity vectors into the unit ball after each step')

	p = sub.add_parser('eval-link', help='link prediction')
	common(p, dataset='required', model=True)
	p.add_argument('--filtered-only', action='store_true', help='report the filtered setting only')

	common(sub.add_parser('eval-class', help='triple classification'), dataset='required', model=True)

	p = sub.add_parser('analyze-weights', help='LDL weight difference per relation')
	common(p, dataset='optional', model=True)

	p = sub.add_parser('export-pca', help='PCA coordinates around one relation')
	common(p, dataset='required', model=True)
	p.add_argument('--relation', required=True, help='relation name')
	p.add_argument('--head', help='head entity name (default: the head with most tails)')
	p.add_argument('--n-unmatched', type=int, default=50, help='number of wrong tails to include')
	return parser


def _load(args):
	return read_dataset(resolve_dataset(args.dataset), column_order=args.column_order)


def _workers(args):
	return 1 if args.workers is None else args.workers


def _out_dir(path):
	if not os.path.isdir(path): os.makedirs(path)
	return path


def cmd_stats(args, argv):
	'''
	Print and write the dataset statistics row.
	'''
	ts = _load(args)
	stats = dataset_statistics(ts)
	out = _out_dir(args.out)
	cols = ('rel', 'ent', 'train', 'valid', 'test', 'atpe')
	filename = os.path.join(out, 'stats.csv')
	with open(filename, 'w', newline='', encoding='utf-8') as f:
		writer = csv.writer(f)
		writer.writerow(cols)
		writer.writerow([stats[c] for c in cols])
	print('#Rel %d  #Ent %d  #Train %d  #Valid %d  #Test %d  ATPE %.2f'
		% (stats['rel'], stats['ent'], stats['train'], stats['valid'], stats['test'], stats['atpe']))
	man = RunManifest('stats', argv, dataset=resolve_dataset(args.dataset))
	man.add_artifact('stats', filename)
	man.results = {c: float(stats[c]) for c in cols}
	man.write(out)
	return 0


def train_configs(args):
	'''
	Resolve the training configurations of a train command.
	Precedence: flags > config file > preset > defaults.

	Returns:
		list of (TrainConfig, explicitly set keys); several when the
		config file defines a grid
	'''
	file_params = read_config_file(args.config) if args.config else {}
	flags = {name: getattr(args, name) for _, name in train_flags + (('', 'project_entities'),)
		if getattr(args, name) is not None}
	if args.workers is not None: flags['workers'] = args.workers
	runs = []
	for combo in expand_grid(file_params):
		cfg = preset_config(args.preset) if args.preset else TrainConfig()
		cfg.update(**combo)
		cfg.update(**flags)
		explicit = set(combo) | set(flags)
		check_conflicts(cfg, explicit)
		runs.append((cfg.check(), explicit))
	return runs


def _train_one(ts, cfg, out, argv, dataset):
	ckpt_dir = _out_dir(os.path.join(out, 'checkpoints'))
	man = RunManifest('train', argv, dataset=dataset, config=cfg.as_dict(), seed=cfg.seed)

	def on_improve(model, epoch, metric):
		filename = os.path.join(ckpt_dir, 'epoch_%04d.txt' % epoch)
		save_model(model, filename)
		man.add_artifact('checkpoint_epoch_%04d' % epoch, filename)

	model, report = train(ts, cfg, on_improve=on_improve)
	model_file = os.path.join(out, 'model.txt')
	save_model(model, model_file)
	report_file = os.path.join(out, 'train_report.csv')
	report.write(report_file)
	man.add_artifact('report', report_file)
	print_msg('Checkpoint hash %s' % man.set_checkpoint(model_file))
	man.results = {'best_epoch': report.best_epoch, 'stopped_early': report.stopped_early,
		'best_metric': None if report.best_metric is None else float(report.best_metric),
		'warnings': list(report.warnings)}
	man.write(out)
	return man


def cmd_train(args, argv):
	'''
	Train one model, or one per grid point into run_NNN subdirectories.
	'''
	dataset = resolve_dataset(args.dataset)
	ts = read_dataset(dataset, column_order=args.column_order)
	runs = train_configs(args)
	out = _out_dir(args.out)
	for i, (cfg, _) in enumerate(runs):
		run_out = out if len(runs) == 1 else _out_dir(os.path.join(out, 'run_%03d' % i))
		if len(runs) > 1: print_msg('Grid point %d/%d: %s' % (i + 1, len(runs), cfg))
		_train_one(ts, cfg, run_out, argv, dataset)
	return 0


def cmd_eval_link(args, argv):
	dataset = resolve_dataset(args.dataset)
	ts = read_dataset(dataset, column_order=args.column_order)
	model = load_model(args.model, ts)
	report = link_prediction(model, ts, workers=_workers(args))
	out = _out_dir(args.out)
	man = RunManifest('eval-link', argv, dataset=dataset)
	man.set_checkpoint(args.model)
	files = {'link_prediction': os.path.join(out, 'link_prediction.csv'),
		'categories': os.path.join(out, 'link_categories.csv'),
		'ranks': os.path.join(out, 'ranks.csv')}
	write_rank_report(report, files['link_prediction'], filtered_only=args.filtered_only)
	write_category_table(report, files['categories'], 'filtered')
	write_ranks(report, files['ranks'], ts)
	for name, filename in files.items(): man.add_artifact(name, filename)
	for setting, mr, hits in report.table_rows(args.filtered_only):
		print('%-8s  Mean Rank %10.1f  HITS@10 %6.2f%%' % (setting, mr, hits))
		man.results[setting] = {'mean_rank': float(mr), 'hits_at_10': float(hits)}
	man.write(out)
	return 0


def cmd_eval_class(args, argv):
	dataset = resolve_dataset(args.dataset)
	ts = read_dataset(dataset, column_order=args.column_order)
	if ts.valid_labels is None or ts.test_labels is None:
		raise ValueError('classification labels required')
	model = load_model(args.model, ts)
	thr = tune_thresholds(model, ts.valid, ts.valid_labels)
	acc = classify(model, thr, ts.test, ts.test_labels)
	per_rel = classify_per_relation(model, thr, ts.test, ts.test_labels)
	out = _out_dir(args.out)
	filename = os.path.join(out, 'classification.csv')
	write_classification(filename, acc, per_rel, ts)
	print('Accuracy %.2f%%' % acc)
	man = RunManifest('eval-class', argv, dataset=dataset)
	man.set_checkpoint(args.model)
	man.add_artifact('classification', filename)
	man.results = {'accuracy': float(acc), 'unseen_relations': [ts.relations[r] for r in thr.unseen]}
	man.write(out)
	return 0


def cmd_analyze_weights(args, argv):
	'''
	Weight table; with a labelled dataset the per-relation test accuracy
	is added.
	'''
	ts, accuracy, dataset = None, None, resolve_dataset(args.dataset)
	if dataset is not None:
		ts = read_dataset(dataset, column_order=args.column_order)
	model = load_model(args.model, ts)
	if ts is not None:
		if ts.valid_labels is not None and ts.test_labels is not None:
			thr = tune_thresholds(model, ts.valid, ts.valid_labels)
			accuracy = classify_per_relation(model, thr, ts.test, ts.test_labels)
	table = weight_table(model, ts, accuracy, workers=_workers(args))
	out = _out_dir(args.out)
	filename = os.path.join(out, 'weight_table.csv')
	write_weight_table(table, filename)
	man = RunManifest('analyze-weights', argv, dataset=dataset)
	man.set_checkpoint(args.model)
	man.add_artifact('weight_table', filename)
	man.results = {'relations': len(table), 'flagged': [row['relation'] for row in table if row['flagged']]}
	man.write(out)
	return 0


def cmd_export_pca(args, argv):
	dataset = resolve_dataset(args.dataset)
	ts = read_dataset(dataset, column_order=args.column_order)
	model = load_model(args.model, ts)
	rows = export_pca(model, ts, args.relation, head=args.head, n_unmatched=args.n_unmatched)
	out = _out_dir(args.out)
	filename = os.path.join(out, 'pca.csv')
	write_pca(rows, filename)
	man = RunManifest('export-pca', argv, dataset=dataset)
	man.set_checkpoint(args.model)
	man.add_artifact('pca', filename)
	man.results = {'relation': args.relation, 'vectors': len(rows)}
	man.write(out)
	return 0


commands = {
	'stats': cmd_stats,
	'train': cmd_train,
	'eval-link': cmd_eval_link,
	'eval-class': cmd_eval_class,
	'analyze-weights': cmd_analyze_weights,
	'export-pca': cmd_export_pca,
}


def main(argv=None):
	"""
	Run one command.

	Parameters
	----------
	argv: list of str
		Arguments after the program name (Default: sys.argv[1:]).

	Returns
	-------
	Exit status: 0 on success, 1 on error.
	"""
	if argv is None: argv = sys.argv[1:]
	argv = list(argv)
	verbose = hf.verbose
	command = argv[0] if argv else 'akg'
	try:
		args = build_parser().parse_args(argv)
		command = args.command
		if args.quiet: hf.set_verbose(False)
		return commands[command](args, ['akg'] + argv)
	except (ValueError, IOError, RuntimeError) as err:
		if isinstance(err, ArgumentError): command = err.command
		msg = ' '.join(str(err).split())
		sys.stderr.write('akg-error %s: %s\n' % (command, msg))
		return 1
	finally:
		hf.set_verbose(verbose)


if __name__ == '__main__':
	sys.exit(main())
