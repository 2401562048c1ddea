#include "clic/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "clic/container.hpp"

namespace clic::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v)
{
	if (std::isnan(v)) {
		return "nan";
	}

	if (std::isinf(v)) {
		return v < 0 ? "-inf" : "inf";
	}

	char buf[64];
	std::snprintf(buf, sizeof(buf), "%.12g", v);
	return buf;
}

std::string cdbText(const Cancellation &c, bool evaluated)
{
	if (!evaluated) {
		return "";
	}

	return c.db ? num(*c.db) : "above_range";
}

bool evaluated(const CancellerResult &r)
{
	return r.cancellation.signal_energy > 0.0;
}

void appendLines(const fs::path &path, const char *header, const std::vector<std::string> &lines)
{
	std::string text;

	if (fs::exists(path)) {
		const auto bytes = container::readFile(path);
		text.assign(bytes.begin(), bytes.end());
	} else {
		text = std::string(header) + "\n";
	}

	for (const auto &l : lines) {
		text += l + "\n";
	}

	container::writeFileAtomic(path, text);
}

std::vector<std::string> splitCsv(const std::string &line)
{
	std::vector<std::string> out;
	std::stringstream ss(line);
	std::string cell;

	while (std::getline(ss, cell, ',')) {
		out.push_back(cell);
	}

	if (!line.empty() && line.back() == ',') {
		out.emplace_back();
	}

	return out;
}

struct CsvTable {
	std::vector<std::string> header;
	std::vector<std::vector<std::string>> rows;

	std::size_t column(const std::string &name) const
	{
		const auto it = std::find(header.begin(), header.end(), name);

		if (it == header.end()) {
			throw CommandError(1, "schema error: missing column '" + name + "'");
		}

		return static_cast<std::size_t>(it - header.begin());
	}
};

CsvTable readCsv(const fs::path &path, const std::string &required_header)
{
	std::ifstream in(path);

	if (!in) {
		throw CommandError(1, "cannot open " + path.string());
	}

	CsvTable t;
	std::string line;

	if (!std::getline(in, line)) {
		throw CommandError(1, "schema error: " + path.string() + " is empty");
	}

	t.header = splitCsv(line);

	for (const auto &name : splitCsv(required_header)) {
		(void)t.column(name);
	}

	while (std::getline(in, line)) {
		if (line.empty()) {
			continue;
		}

		auto cells = splitCsv(line);

		if (cells.size() != t.header.size()) {
			throw CommandError(1, "schema error: row has " + std::to_string(cells.size()) + " cells, expected " +
						      std::to_string(t.header.size()));
		}

		t.rows.push_back(std::move(cells));
	}

	return t;
}

void refuseOverwrite(const fs::path &path, bool force)
{
	if (fs::exists(path) && !force) {
		throw CommandError(1, "refusing to overwrite " + path.string() + " (use --force)");
	}
}

CancellerOptions cancellerOptions(const RunConfig &cfg, CancellerKind kind)
{
	CancellerOptions o;
	o.order = cfg.canceller.order;
	o.hidden = kind == CancellerKind::Hc ? cfg.canceller.hidden_hc : cfg.canceller.hidden_nnc;
	o.train = cfg.canceller.train;
	o.ls.ridge = cfg.canceller.ridge;
	o.seed = cfg.scenario.seed;
	return o;
}

std::string modelFileName(const CancellerResult &r)
{
	switch (r.kind) {
	case CancellerKind::Tc: return "tc.clic";
	case CancellerKind::Pc: return "pc_P" + std::to_string(r.order) + ".clic";
	case CancellerKind::Nnc: return "nnc_Nh" + std::to_string(r.hidden) + ".clic";
	case CancellerKind::Hc: return "hc_Nh" + std::to_string(r.hidden) + ".clic";
	}

	return "model.clic";
}

CliDataset loadOrGenerate(const RunConfig &cfg, std::ostream &log)
{
	const auto path = cfg.datasetPath();

	if (fs::exists(path)) {
		return loadDataset(path);
	}

	log << "dataset " << path.string() << " not found, generating\n";
	fs::create_directories(path.parent_path());
	auto ds = generateDataset(cfg.scenario);
	saveDataset(ds, path);
	return ds;
}

} // namespace

RunConfig resolveConfig(const CommonOptions &opts)
{
	RunConfig cfg;

	if (opts.config) {
		cfg = loadRunConfig(*opts.config);
	}

	if (opts.seed) {
		cfg.scenario.seed = *opts.seed;
	}

	if (opts.out) {
		cfg.output.dir = opts.out->string();
	}

	return cfg;
}

fs::path cmdGenerate(const CommonOptions &opts, std::ostream &log)
{
	const auto cfg = resolveConfig(opts);
	const auto path = cfg.datasetPath();
	refuseOverwrite(path, opts.force);
	fs::create_directories(cfg.outDir());

	GenerationTrace trace;
	const auto ds = generateDataset(cfg.scenario, &trace);
	saveDataset(ds, path);
	container::writeFileAtomic(cfg.outDir() / "config.json", toJson(cfg).dump(2) + "\n");

	log << "wrote " << path.string() << ": " << ds.size() << " samples, split " << ds.split_index << "/"
	    << ds.size() - ds.split_index << ", test-window CLI power " << num(trace.clean_rx_power_dbm) << " dBm\n";
	return path;
}

CancellerResult cmdRun(const CommonOptions &opts, const std::string &canceller, std::ostream &log)
{
	CancellerKind kind;

	try {
		kind = cancellerFromString(canceller);
	} catch (const InvalidArgument &e) {
		throw CommandError(2, e.what());
	}

	const auto cfg = resolveConfig(opts);
	const auto ds = loadOrGenerate(cfg, log);
	const auto dims = dimsFromDataset(ds);
	auto r = runCanceller(kind, ds, dims, cancellerOptions(cfg, kind));

	const auto dir = cfg.outDir();
	fs::create_directories(dir);
	appendLines(dir / "results.csv", kResultsHeader, {resultRow(r)});

	if (!r.history.empty()) {
		appendLines(dir / "history.csv", kHistoryHeader, historyRows(r));
	}

	if (r.network) {
		saveFnn(*r.network, dir / modelFileName(r));
	} else if (r.coefficients) {
		savePolyCoefficients(*r.coefficients, dir / modelFileName(r));
	}

	log << toString(r.kind) << ": C_dB " << cdbText(r.cancellation, true) << ", residual "
	    << num(r.residual_power_dbm) << " dBm, n_params " << r.n_params << ", complexity " << r.complexity << "\n";
	return r;
}

std::vector<std::int64_t> parseValues(const std::string &spec, std::int64_t default_step)
{
	std::vector<std::int64_t> out;

	if (spec.empty()) {
		throw CommandError(2, "--values is empty");
	}

	auto toInt = [&spec](const std::string &s) {
		try {
			std::size_t used = 0;
			const auto v = std::stoll(s, &used);

			if (used != s.size()) {
				throw std::invalid_argument(s);
			}

			return static_cast<std::int64_t>(v);
		} catch (const std::exception &) {
			throw CommandError(2, "bad --values '" + spec + "'");
		}
	};

	if (const auto dots = spec.find(".."); dots != std::string::npos) {
		std::string rest = spec.substr(dots + 2);
		std::int64_t step = default_step;

		if (const auto colon = rest.find(':'); colon != std::string::npos) {
			step = toInt(rest.substr(colon + 1));
			rest = rest.substr(0, colon);
		}

		const auto lo = toInt(spec.substr(0, dots));
		const auto hi = toInt(rest);

		if (step <= 0 || hi < lo) {
			throw CommandError(2, "bad --values range '" + spec + "'");
		}

		for (auto v = lo; v <= hi; v += step) {
			out.push_back(v);
		}

		return out;
	}

	for (const auto &cell : splitCsv(spec)) {
		out.push_back(toInt(cell));
	}

	return out;
}

fs::path cmdSweep(const CommonOptions &opts, const SweepOptions &sw, std::ostream &log)
{
	SweepAxis axis;

	try {
		axis = sweepAxisFromString(sw.axis);
	} catch (const InvalidArgument &e) {
		throw CommandError(2, e.what());
	}

	const auto values = parseValues(sw.values, axis == SweepAxis::Order ? 2 : 1);
	const auto cfg = resolveConfig(opts);
	const auto dir = cfg.outDir();
	const auto path = dir / (std::string("sweep_") + (axis == SweepAxis::Order ? "P" : "Nh") + ".csv");
	refuseOverwrite(path, opts.force);

	SweepShape shape;
	shape.n_rx = cfg.scenario.n_rx;
	shape.n_tx = cfg.scenario.n_tx;
	shape.dims = {cfg.scenario.paMemory(), cfg.scenario.channel_taps};

	std::optional<CliDataset> ds;

	if (!sw.counts_only && !values.empty()) {
		ds = loadOrGenerate(cfg, log);
		shape.dims = dimsFromDataset(*ds);
	}

	const auto rows = sweep(ds ? &*ds : nullptr, shape, axis, values,
				cancellerOptions(cfg, CancellerKind::Nnc));

	std::string text = std::string(kResultsHeader) + "\n";

	for (const auto &r : rows) {
		text += resultRow(r) + "\n";
	}

	fs::create_directories(dir);
	container::writeFileAtomic(path, text);
	log << "wrote " << path.string() << " (" << rows.size() << " rows)\n";
	return path;
}

std::string resultRow(const CancellerResult &r)
{
	const bool ev = evaluated(r);
	std::ostringstream os;
	os << toString(r.kind) << ',' << r.order << ',' << r.hidden << ',' << r.seed << ','
	   << cdbText(r.cancellation, ev) << ',' << (ev ? num(r.residual_power_dbm) : "") << ','
	   << (ev ? num(r.rx_power_dbm) : "") << ',' << r.n_params << ',' << r.complexity << ',' << r.epochs_trained;
	return os.str();
}

std::vector<std::string> historyRows(const CancellerResult &r)
{
	std::vector<std::string> rows;

	for (std::size_t e = 0; e < r.history.size(); ++e) {
		std::ostringstream os;
		os << toString(r.kind) << ',' << r.order << ',' << r.hidden << ',' << r.seed << ',' << e + 1 << ','
		   << num(r.history[e].train_loss) << ',' << num(r.history[e].test_loss) << ','
		   << (e < r.epoch_c_db.size() ? num(r.epoch_c_db[e]) : "");
		rows.push_back(os.str());
	}

	return rows;
}

void cmdReport(const ReportOptions &opts, std::ostream &out)
{
	const auto results = readCsv(opts.results, kResultsHeader);
	const auto c_id = results.column("canceller");
	const auto c_db = results.column("c_db");
	const auto c_res = results.column("residual_dbm");
	const auto c_rx = results.column("rx_dbm");

	auto sortKey = [&](const std::vector<std::string> &row) {
		if (row[c_db] == "above_range") {
			return std::numeric_limits<double>::infinity();
		}

		return row[c_db].empty() ? -std::numeric_limits<double>::infinity() : std::stod(row[c_db]);
	};

	auto rows = results.rows;
	std::stable_sort(rows.begin(), rows.end(), [&](const auto &a, const auto &b) { return sortKey(a) > sortKey(b); });

	const fs::path dir = opts.out ? *opts.out : opts.results.parent_path();
	fs::create_directories(dir.empty() ? fs::path(".") : dir);

	std::string residual_csv = "canceller,order,hidden,seed,rx_dbm,residual_dbm,c_db\n";
	json summary = json::array();
	char line[256];
	std::snprintf(line, sizeof(line), "%-9s %5s %6s %12s %14s %14s %10s %10s\n", "canceller", "P", "N_h", "C_dB",
		      "residual_dBm", "rx_dBm", "n_params", "complexity");
	out << line;

	for (const auto &row : rows) {
		const auto get = [&](const char *name) { return row[results.column(name)]; };
		std::snprintf(line, sizeof(line), "%-9s %5s %6s %12s %14s %14s %10s %10s\n", row[c_id].c_str(),
			      get("order").c_str(), get("hidden").c_str(), row[c_db].c_str(), row[c_res].c_str(),
			      row[c_rx].c_str(), get("n_params").c_str(), get("complexity").c_str());
		out << line;

		json entry;

		for (std::size_t i = 0; i < results.header.size(); ++i) {
			entry[results.header[i]] = row[i];
		}

		summary.push_back(entry);

		if (!row[c_res].empty()) {
			residual_csv += row[c_id] + ',' + get("order") + ',' + get("hidden") + ',' + get("seed") + ',' +
					row[c_rx] + ',' + row[c_res] + ',' + row[c_db] + '\n';
		}
	}

	container::writeFileAtomic(dir / "summary.json", summary.dump(2) + "\n");
	container::writeFileAtomic(dir / "residual_power.csv", residual_csv);

	const fs::path history = opts.history ? *opts.history : opts.results.parent_path() / "history.csv";

	if (opts.history || fs::exists(history)) {
		const auto h = readCsv(history, kHistoryHeader);
		std::string text = std::string(kHistoryHeader) + "\n";

		std::vector<std::size_t> cols;

		for (const auto &name : splitCsv(kHistoryHeader)) {
			cols.push_back(h.column(name));
		}

		for (const auto &row : h.rows) {
			std::string l;

			for (std::size_t i = 0; i < cols.size(); ++i) {
				l += (i ? "," : "") + row[cols[i]];
			}

			text += l + "\n";
		}

		container::writeFileAtomic(dir / "epoch_loss.csv", text);
	}
}

} // namespace clic::cli
