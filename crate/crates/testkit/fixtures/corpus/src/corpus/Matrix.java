package corpus;

public class Matrix {
    final double[][] m;

    Matrix(int rows, int cols) {
        m = new double[rows][cols];
    }

    static Matrix identity(int n) {
        Matrix r = new Matrix(n, n);
        for (int i = 0; i < n; i++) r.m[i][i] = 1.0;
        return r;
    }

    Matrix multiply(Matrix o) {
        int rows = m.length, cols = o.m[0].length, inner = o.m.length;
        Matrix r = new Matrix(rows, cols);
        for (int i = 0; i < rows; i++)
            for (int j = 0; j < cols; j++) {
                double s = 0;
                for (int k = 0; k < inner; k++) s += m[i][k] * o.m[k][j];
                r.m[i][j] = s;
            }
        return r;
    }

    Matrix transpose() {
        Matrix r = new Matrix(m[0].length, m.length);
        for (int i = 0; i < m.length; i++)
            for (int j = 0; j < m[0].length; j++) r.m[j][i] = m[i][j];
        return r;
    }

    double trace() {
        double t = 0;
        for (int i = 0; i < m.length && i < m[i].length; i++) t += m[i][i];
        return t;
    }

    static int[][][] cube(int n) {
        int[][][] c = new int[n][n][n];
        for (int i = 0; i < n; i++) c[i][i][i] = i;
        return c;
    }

    static class Sparse {
        final int[] rows, cols;
        final double[] vals;

        Sparse(int[] r, int[] c, double[] v) {
            rows = r;
            cols = c;
            vals = v;
        }

        double get(int r, int c) {
            for (int i = 0; i < vals.length; i++) {
                if (rows[i] == r && cols[i] == c) return vals[i];
            }
            return 0.0;
        }
    }
}
