#include "hzreach/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace hz
{

Json matrix_to_json(const Matrix& M)
{
    if (M.size() == 0)
        return Json::array();
    Json rows = Json::array();
    for (Index i = 0; i < M.rows(); ++i)
    {
        Json row = Json::array();
        for (Index j = 0; j < M.cols(); ++j)
            row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json vector_to_json(const Vector& v)
{
    Json arr = Json::array();
    for (Index i = 0; i < v.size(); ++i)
        arr.push_back(v(i));
    return arr;
}

Matrix matrix_from_json(const Json& j)
{
    if (!j.is_array())
        throw std::invalid_argument("matrix_from_json: expected an array");
    if (j.empty())
        return Matrix(0, 0);
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j.at(0).size());
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i)
    {
        const Json& row = j.at(static_cast<size_t>(i));
        if (static_cast<Index>(row.size()) != cols)
            throw std::invalid_argument("matrix_from_json: ragged rows");
        for (Index k = 0; k < cols; ++k)
            M(i, k) = row.at(static_cast<size_t>(k)).get<double>();
    }
    return M;
}

Vector vector_from_json(const Json& j)
{
    if (!j.is_array())
        throw std::invalid_argument("vector_from_json: expected an array");
    Vector v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i)
        v(i) = j.at(static_cast<size_t>(i)).get<double>();
    return v;
}

Json set_to_json(const HybridZonotope& P)
{
    Json j;
    j["Gc"] = matrix_to_json(P.Gc());
    j["Gb"] = matrix_to_json(P.Gb());
    j["c"] = vector_to_json(P.c());
    j["Ac"] = matrix_to_json(P.Ac());
    j["Ab"] = matrix_to_json(P.Ab());
    j["b"] = vector_to_json(P.b());
    return j;
}

HybridZonotope set_from_json(const Json& j)
{
    return HybridZonotope(matrix_from_json(j.at("Gc")), matrix_from_json(j.at("Gb")),
                          vector_from_json(j.at("c")), matrix_from_json(j.at("Ac")),
                          matrix_from_json(j.at("Ab")), vector_from_json(j.at("b")));
}

Json scaled_set_to_json(const ScaledHybridZonotope& S)
{
    Json j = set_to_json(S.base);
    j["r"] = S.r;
    j["n_r"] = S.n_scaled;
    return j;
}

ScaledHybridZonotope scaled_set_from_json(const Json& j)
{
    return scale(set_from_json(j), j.at("r").get<double>(), j.at("n_r").get<int>());
}

Json network_to_json(const ReluNetwork& net)
{
    Json j;
    Json widths = Json::array();
    for (Index w : net.widths())
        widths.push_back(w);
    j["widths"] = widths;
    Json Ws = Json::array();
    Json ws = Json::array();
    for (size_t i = 0; i < net.weights.size(); ++i)
    {
        Ws.push_back(matrix_to_json(net.weights[i]));
        ws.push_back(vector_to_json(net.biases[i]));
    }
    j["weights"] = Ws;
    j["biases"] = ws;
    return j;
}

ReluNetwork network_from_json(const Json& j)
{
    const Json& Ws = j.at("weights");
    const Json& ws = j.at("biases");
    if (Ws.size() != ws.size() || Ws.empty())
        throw std::invalid_argument("network_from_json: weights/biases layer counts");
    std::vector<Matrix> W;
    std::vector<Vector> w;
    for (size_t i = 0; i < Ws.size(); ++i)
    {
        W.push_back(matrix_from_json(Ws.at(i)));
        w.push_back(vector_from_json(ws.at(i)));
    }
    ReluNetwork net(std::move(W), std::move(w)); // validates chaining
    if (j.contains("widths"))
    {
        const std::vector<Index> expect = net.widths();
        const Json& widths = j.at("widths");
        if (widths.size() != expect.size())
            throw std::invalid_argument("network_from_json: widths length");
        for (size_t i = 0; i < expect.size(); ++i)
            if (widths.at(i).get<Index>() != expect[i])
                throw std::invalid_argument("network_from_json: widths do not match matrices");
    }
    return net;
}

Json report_to_json(const TrainReport& r)
{
    Json j;
    j["success"] = r.success;
    j["cap_hit"] = r.cap_hit;
    j["total_iterations"] = r.total_iterations;
    j["total_seconds"] = r.total_seconds;
    Json iters = Json::array();
    for (const auto& it : r.iterations)
    {
        Json e;
        e["iter"] = it.iter;
        e["loss"] = it.loss;
        e["rtilde"] = it.rtilde;
        e["t_loss_ms"] = it.t_loss_ms;
        e["t_grad_ms"] = it.t_grad_ms;
        e["t_update_ms"] = it.t_update_ms;
        iters.push_back(std::move(e));
    }
    j["iterations"] = iters;
    Json vers = Json::array();
    for (const auto& v : r.verifications)
    {
        Json e;
        e["iter"] = v.iter;
        e["empty"] = v.empty;
        e["t_ms"] = v.t_ms;
        vers.push_back(std::move(e));
    }
    j["verifications"] = vers;
    return j;
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string report_to_csv(const TrainReport& r)
{
    std::ostringstream os;
    os << "type,iter,loss,rtilde,empty\n";
    size_t vi = 0;
    auto flush_verifications = [&](int upto)
    {
        while (vi < r.verifications.size() && r.verifications[vi].iter <= upto)
        {
            const auto& v = r.verifications[vi++];
            os << "verify," << v.iter << ",,," << (v.empty ? 1 : 0) << "\n";
        }
    };
    for (const auto& it : r.iterations)
    {
        flush_verifications(it.iter - 1);
        // A verification at this iteration ran before the update.
        while (vi < r.verifications.size() && r.verifications[vi].iter == it.iter)
        {
            const auto& v = r.verifications[vi++];
            os << "verify," << v.iter << ",,," << (v.empty ? 1 : 0) << "\n";
        }
        os << "iter," << it.iter << "," << format_double(it.loss) << ","
           << format_double(it.rtilde) << ",\n";
    }
    flush_verifications(r.total_iterations);
    return os.str();
}

Json load_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    Json j;
    in >> j;
    return j;
}

void save_json_file(const std::string& path, const Json& j)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

void save_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
}

} // namespace hz
