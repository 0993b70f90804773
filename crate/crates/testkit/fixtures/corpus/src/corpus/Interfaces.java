package corpus;

public class Interfaces {
    public interface Visitor {
        void visitNumber(int n);

        void visitName(String s);
    }

    public interface Node {
        void accept(Visitor v);
    }

    static class Num implements Node {
        final int n;

        Num(int n) {
            this.n = n;
        }

        public void accept(Visitor v) {
            v.visitNumber(n);
        }
    }

    static class Name implements Node {
        final String s;

        Name(String s) {
            this.s = s;
        }

        public void accept(Visitor v) {
            v.visitName(s);
        }
    }

    static class Summer implements Visitor {
        int total;
        int names;

        public void visitNumber(int n) {
            total += n;
        }

        public void visitName(String s) {
            names++;
        }
    }

    public static int sum(Node[] nodes) {
        Summer s = new Summer();
        for (int i = 0; i < nodes.length; i++) {
            nodes[i].accept(s);
        }
        return s.total * 100 + s.names;
    }

    public static Visitor printer(final StringBuilder out) {
        return new Visitor() {
            public void visitNumber(int n) {
                out.append(n).append(' ');
            }

            public void visitName(String s) {
                out.append('"').append(s).append("\" ");
            }
        };
    }
}
