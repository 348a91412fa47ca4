public class Run16 {
    public static void main(String[] args) {
        int acc = 0;
        for (int j = 0; j < 19; j++) {
            acc = acc + j * 3;
        }
        System.out.println(acc);
    }
}
